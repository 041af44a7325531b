from fastapi import APIRouter, HTTPException

import schemas
from logic.errors import KrtvError
from logic.grid import DiscreteMeasure
from logic.krnorm_oracle import kr_norm_exact

router = APIRouter(tags=["kr-norm"])


@router.post("/krnorm", response_model=schemas.KrNormResponse)
def krnorm(request: schemas.KrNormRequest):
    try:
        mu = DiscreteMeasure(
            [m.point for m in request.masses],
            [m.weight for m in request.masses],
        )
        res = kr_norm_exact(mu, schemas.RegParams(lambda1=request.lambda1, lambda2=request.lambda2))
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except KrtvError as e:
        raise HTTPException(status_code=500, detail=f"KR norm evaluation failed: {str(e)}")
    cert = res.certificate
    return schemas.KrNormResponse(
        value=res.value,
        dual_value=cert.dual,
        certificate=cert.gap,
        certified=cert.certified,
        potentials=res.dual_f.tolist(),
    )

import numpy as np
from fastapi import APIRouter, HTTPException

import schemas
from logic.errors import KrtvError
from logic.grid import GridFunction
from logic.variational import cartoon_texture, krtv_denoise, l1tv_denoise

router = APIRouter(tags=["denoising"])


def _grid(values, h: float) -> GridFunction:
    arr = np.asarray(values, dtype=float)
    # a single row is a 1D signal
    return GridFunction(arr[0] if arr.shape[0] == 1 else arr, h)


def _rows(u: GridFunction) -> list:
    return np.atleast_2d(u.values).tolist()


@router.post("/denoise", response_model=schemas.DenoiseResponse)
def denoise(request: schemas.DenoiseRequest):
    try:
        u0 = _grid(request.values, request.h)
        cfg = request.solver.to_config()
        if request.model == "krtv":
            res = krtv_denoise(u0, schemas.RegParams(lambda1=request.lambda1, lambda2=request.lambda2), cfg)
        else:
            if request.lambda1 is None:
                raise ValueError("lambda1 is required for l1tv")
            res = l1tv_denoise(u0, request.lambda1, cfg)
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except KrtvError as e:
        raise HTTPException(status_code=500, detail=f"Denoising failed: {str(e)}")
    return schemas.DenoiseResponse(values=_rows(res.u), report=res.report)


@router.post("/decompose", response_model=schemas.DecomposeResponse)
def decompose(request: schemas.DecomposeRequest):
    try:
        u0 = _grid(request.values, request.h)
        cfg = request.solver.to_config()
        if request.model == "krtv":
            params = schemas.RegParams(lambda1=request.lambda1, lambda2=request.lambda2)
        else:
            params = request.lam if request.model == "gtv" else request.lambda1
            if params is None:
                raise ValueError(f"a weight is required for {request.model}")
        dec = cartoon_texture(u0, request.model, params, cfg)
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except KrtvError as e:
        raise HTTPException(status_code=500, detail=f"Decomposition failed: {str(e)}")
    return schemas.DecomposeResponse(cartoon=_rows(dec.cartoon), texture=_rows(dec.texture), report=dec.report)

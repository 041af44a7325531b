from contextlib import asynccontextmanager
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from database import init_db
from routers import denoise, krnorm, runs
from logger import get_logger
from dotenv import load_dotenv
import os
import time

load_dotenv()

VERSION = "1.0.0"

logger = get_logger()


@asynccontextmanager
async def lifespan(app: FastAPI):
    init_db()
    logger.log_app_event("startup", {"version": VERSION})
    yield
    logger.log_app_event("shutdown")


app = FastAPI(
    title="KR-TV",
    description="""
    Kantorovich-Rubinstein-TV denoising and cartoon-texture decomposition.

    ## Endpoints
    - Denoising: KR-TV and L1-TV on signals (single row) and images
    - Decomposition: cartoon / texture split with KR-TV, L1-TV or G-TV
    - KR norm: certified value for small point measures
    - Runs: reports recorded by the command-line tool
    """,
    version=VERSION,
    lifespan=lifespan
)

ALLOWED_ORIGINS = os.getenv("CORS_ORIGINS", "*").split(",")
app.add_middleware(
    CORSMiddleware,
    allow_origins=ALLOWED_ORIGINS,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    start_time = time.time()

    response = await call_next(request)

    duration_ms = (time.time() - start_time) * 1000

    path = request.url.path
    if not path.startswith(("/docs", "/openapi.json", "/redoc")):
        logger.log_api_request(
            method=request.method,
            path=path,
            status_code=response.status_code,
            duration_ms=duration_ms,
            client_ip=request.client.host if request.client else None
        )

    return response


app.include_router(denoise.router)
app.include_router(krnorm.router)
app.include_router(runs.router)


@app.get("/")
def root():
    return {
        "message": "KR-TV denoising service",
        "version": VERSION,
        "docs": "/docs",
        "status": "running",
    }


@app.get("/health")
def health_check():
    return {
        "status": "healthy",
        "version": VERSION
    }


if __name__ == "__main__":
    import uvicorn
    import argparse

    parser = argparse.ArgumentParser(description="KR-TV HTTP service")
    parser.add_argument("--host", default=os.getenv("HOST", "127.0.0.1"), help="Host to bind to")
    parser.add_argument("--port", type=int, default=int(os.getenv("PORT", "8000")), help="Port to bind to")
    parser.add_argument("--reload", action="store_true", default=os.getenv("RELOAD", "false").lower() == "true", help="Enable auto-reload")

    args = parser.parse_args()

    print(f"📡 Server: http://{args.host}:{args.port}")
    print(f"📚 API Docs: http://{args.host}:{args.port}/docs")

    uvicorn.run("main:app", host=args.host, port=args.port, reload=args.reload)

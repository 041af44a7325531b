from routers import denoise, krnorm, runs

__all__ = ['denoise', 'krnorm', 'runs']

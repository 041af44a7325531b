from logic.variational import krtv_denoise, l1tv_denoise, gtv_decompose, cartoon_texture, match_tv_parameter
from logic.krnorm_oracle import kr_norm_exact, kr_norm_grid

__all__ = [
    'krtv_denoise',
    'l1tv_denoise',
    'gtv_decompose',
    'cartoon_texture',
    'match_tv_parameter',
    'kr_norm_exact',
    'kr_norm_grid',
]

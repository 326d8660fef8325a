"""Backend selection for the fitness hot loops.

The compiled extension is used when it imports; otherwise the numpy
fallback. The response-error sum is numpy in both cases (vectorized
transcendentals beat a compiled scalar loop). Set ``DSSA_PURE_PYTHON=1`` to force the fallback.
"""

import os

BACKEND = "python"

if os.environ.get("DSSA_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import greedy_match, response_error_sum, term_coefficients
else:
    try:
        from ._kernels import greedy_match, term_coefficients
        from ._kernels_py import response_error_sum

        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import greedy_match, response_error_sum, term_coefficients

__all__ = ["BACKEND", "greedy_match", "response_error_sum", "term_coefficients"]

"""Numeric kernel backends.

The compiled extension (`_core`, built from _core.pyx) is preferred; when it
is absent the numpy fallback is selected at import. Set HPCAI500_KERNELS to
"numpy" or "cython" to force a choice (forcing "cython" without the
extension built is an error rather than a silent fallback).

Both backends implement: pairwise_sq_dists, conditional_affinities,
affinities_for_bandwidths, tsne_grad, kl_divergence, lloyd_iteration.
"""

from __future__ import annotations

import os

from . import numpy_backend

try:
    from . import _core as _cython_backend
except ImportError:
    _cython_backend = None

_BACKENDS = {"numpy": numpy_backend}
if _cython_backend is not None:
    _BACKENDS["cython"] = _cython_backend


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str):
    try:
        return _BACKENDS[name]
    except KeyError:
        raise KeyError(
            f"kernel backend {name!r} not available; "
            f"built: {', '.join(available_backends())}"
        ) from None


BACKEND = os.environ.get("HPCAI500_KERNELS") or (
    "cython" if _cython_backend is not None else "numpy"
)
if BACKEND not in _BACKENDS:
    raise ImportError(
        f"HPCAI500_KERNELS={BACKEND!r} requested but only "
        f"{', '.join(available_backends())} available"
    )

_active = _BACKENDS[BACKEND]

pairwise_sq_dists = _active.pairwise_sq_dists
conditional_affinities = _active.conditional_affinities
affinities_for_bandwidths = _active.affinities_for_bandwidths
tsne_grad = _active.tsne_grad
kl_divergence = _active.kl_divergence
lloyd_iteration = _active.lloyd_iteration

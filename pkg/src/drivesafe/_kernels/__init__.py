"""Hot-kernel backend selection.

The compiled extension is preferred when it imported cleanly; the
numpy/Python fallback is always available.  Set ``DRIVESAFE_PURE=1`` in the
environment to force the fallback (useful for benchmarks and CI parity
checks).  Both backends are contractually bit-identical.
"""

from __future__ import annotations

import os

from . import _hot_py

try:  # pragma: no cover - depends on the build environment
    from . import _hot  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover
    _hot = None  # type: ignore[assignment]
    HAVE_COMPILED = False

_FORCE_PURE = os.environ.get("DRIVESAFE_PURE", "") not in ("", "0")

BACKEND = "compiled" if (HAVE_COMPILED and not _FORCE_PURE) else "python"

if BACKEND == "compiled":
    support_counts = _hot.support_counts
    viterbi_path = _hot.viterbi_path
else:
    support_counts = _hot_py.support_counts
    viterbi_path = _hot_py.viterbi_path


def get_backend(name: str):
    """Return the (support_counts, viterbi_path) pair for a backend name."""
    if name == "python":
        return _hot_py.support_counts, _hot_py.viterbi_path
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel extension is not available")
        return _hot.support_counts, _hot.viterbi_path
    raise ValueError(f"unknown kernel backend {name!r}")

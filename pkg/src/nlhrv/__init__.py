"""Nonlinearity detection in short stationary series (RR intervals).

Three indexes (NCI, information storage, GLC) tested against IAAFT
surrogates, plus cohort statistics and a batch CLI.
"""

__version__ = "0.1.0"

from .entropy import local_sample_entropy, nci, sample_entropy  # noqa: E402
from .glc import calibrate, glc_index  # noqa: E402
from .nltest import MEASURES, NonlinearityResult, detect, detect_all  # noqa: E402
from .series import AnalysisParams, RawSeries, normalize  # noqa: E402
from .storage import information_storage  # noqa: E402
from .surrogates import iaaft_surrogate, make_ensemble  # noqa: E402

__all__ = [
    "AnalysisParams",
    "MEASURES",
    "NonlinearityResult",
    "RawSeries",
    "calibrate",
    "detect",
    "detect_all",
    "glc_index",
    "iaaft_surrogate",
    "information_storage",
    "local_sample_entropy",
    "make_ensemble",
    "nci",
    "normalize",
    "sample_entropy",
]

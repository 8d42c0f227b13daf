# hybridq/core/config.py
# --- Runtime knobs (override from the environment or a .env file) ---
import os

from dotenv import load_dotenv

load_dotenv()


def _truthy(val: str | None, default: bool) -> bool:
    """Turn env var strings like '1', 'true', 'yes' into True."""
    if val is None or not val.strip():
        return default
    return val.strip().lower() in {"1", "true", "yes", "y", "on"}


WORKERS          = int(os.getenv("HYBRIDQ_WORKERS", "0"))        # 0 = one per logical CPU
LOG_LEVEL        = os.getenv("HYBRIDQ_LOG_LEVEL", "INFO").upper()
TQDM             = _truthy(os.getenv("HYBRIDQ_TQDM"), True)      # progress bar if tqdm is installed
DENSE_MAX_DIM    = int(os.getenv("HYBRIDQ_DENSE_MAX_DIM", "32"))  # Hilbert dim above which dense expm hands over to Krylov

# numerical tolerances
RK_RTOL          = 1e-9
RK_ATOL          = 1e-12
BLOCH_TOL        = 1e-6
KRYLOV_TOL       = 1e-10
KRYLOV_DIM       = 30
STEP_TRACE_TOL   = 1e-10   # per internal step, untruncated modes
TRACE_TOL        = 1e-9    # per snapshot
HERMITIAN_TOL    = 1e-9
POSITIVITY_TOL   = 1e-6    # untruncated modes only
FOCK_TAIL_TOL    = 1e-4    # population of the two highest Fock levels
PEAK_PROMINENCE  = 1e-3    # relative to the series maximum
OMEGA0           = 10.0    # MHz, reference frequency of the decay fit
ENVELOPE_FLOOR   = 1e-9    # envelope samples below this fraction of E(0) leave the decay fit
LATE_FRACTION    = 0.4     # "late" = the final 40% of a run

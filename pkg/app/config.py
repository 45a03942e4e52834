from dotenv import load_dotenv
import os

load_dotenv()

# Tolerâncias numéricas
TOL_INT = float(os.getenv("BERGMAN_TOL_INT", "1e-9"))
TOL_SHELL = float(os.getenv("BERGMAN_TOL_SHELL", "1e-9"))
TOL_POSITIVE = float(os.getenv("BERGMAN_TOL_POSITIVE", "1e-12"))

# Limites de enumeração e de séries
MAX_TERMS = int(os.getenv("BERGMAN_MAX_TERMS", "2000000"))
DEFAULT_EPS = float(os.getenv("BERGMAN_DEFAULT_EPS", "1e-10"))

# Quadratura e paralelismo
QUAD_RES = int(os.getenv("BERGMAN_QUAD_RES", "128"))
THREADS = int(os.getenv("BERGMAN_THREADS", "0"))  # 0 = todos os núcleos
GRID_CHUNK = int(os.getenv("BERGMAN_GRID_CHUNK", "1024"))

LOG_LEVEL = os.getenv("BERGMAN_LOG_LEVEL", "WARNING")


def get_threads(threads=None) -> int:
    """
    Resolve o número de threads efetivo (argumento, variável de ambiente ou todos os núcleos).
    """
    value = THREADS if threads is None else threads
    if value is None or value <= 0:
        return os.cpu_count() or 1
    return value

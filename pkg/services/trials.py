import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Optional, Tuple

from config import settings

logger = logging.getLogger("TRIALS")

# A trial takes its derived seed and returns None on success or a counterexample description.
Trial = Callable[[int], Optional[str]]


def run_trials(trial: Trial, trials: int, seed: int, workers: Optional[int] = None) -> Optional[Tuple[int, str]]:
    """
    Runs `trial(seed + t)` for t in range(trials) on a thread pool.
    Returns (t, detail) for the lowest failing index, or None when every trial passes.
    """
    if trials <= 0:
        return None
    workers = workers or settings.workers

    failures = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as exe:
        futs = {exe.submit(trial, seed + t): t for t in range(trials)}
        for f in as_completed(futs):
            detail = f.result()
            if detail is not None:
                failures[futs[f]] = detail

    if not failures:
        logger.info(f"{trials} trials passed (seed {seed})")
        return None
    first = min(failures)
    logger.warning(f"{len(failures)}/{trials} trials failed; first at trial {first}")
    return first, failures[first]

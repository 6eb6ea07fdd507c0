import logging
from typing import Callable, List, Sequence, TypeVar

from joblib import Parallel, delayed

logger = logging.getLogger(__name__)

T = TypeVar("T")


class ReplicationRunner:
    """
    Evaluates independent, index-seeded tasks on a joblib thread pool.

    Tasks are grouped into chunks of `chunk_size`; chunks may run in any order
    on any thread but their results are concatenated in index order, so every
    downstream reduction sees the same sequence whatever the thread count.
    """

    def __init__(self, threads: int = 1, chunk_size: int = 64):
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}.")
        if chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {chunk_size}.")
        self.threads = threads
        self.chunk_size = chunk_size

    def _chunks(self, indices: Sequence[int]) -> List[Sequence[int]]:
        return [indices[i:i + self.chunk_size] for i in range(0, len(indices), self.chunk_size)]

    def map(self, task: Callable[[int], T], indices: Sequence[int]) -> List[T]:
        indices = list(indices)
        chunks = self._chunks(indices)

        def run_chunk(chunk: Sequence[int]) -> List[T]:
            return [task(i) for i in chunk]

        if self.threads == 1 or len(chunks) <= 1:
            chunk_results = [run_chunk(c) for c in chunks]
        else:
            chunk_results = Parallel(n_jobs=self.threads, prefer="threads")(
                delayed(run_chunk)(c) for c in chunks
            )
        logger.debug(f"Evaluated {len(indices)} tasks in {len(chunks)} chunks on {self.threads} threads.")
        return [result for chunk in chunk_results for result in chunk]

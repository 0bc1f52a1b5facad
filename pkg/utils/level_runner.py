import asyncio
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence

from config import Config
from utils.progress import Progress

logger = logging.getLogger(__name__)


@dataclass
class LevelTask:
    level: int
    argument: Any
    status: str = "queued"  # queued, running, completed, failed
    result: Any = None
    error: Optional[BaseException] = None


class LevelRunner:
    """Run independent level computations concurrently, collect them in level order"""

    def __init__(self, workers: Optional[int] = None, label: str = "Levels"):
        self.workers = max(1, workers or Config.LEVEL_WORKERS)
        self.label = label
        self.tasks: Dict[int, LevelTask] = {}

    async def _run_task(self, task: LevelTask, fn: Callable, semaphore: asyncio.Semaphore, progress: Progress):
        async with semaphore:
            task.status = "running"
            try:
                task.result = await asyncio.to_thread(fn, task.argument)
                task.status = "completed"
            except Exception as e:
                task.status = "failed"
                task.error = e
                logger.error(f"❌ Level {task.level} failed: {e}")
                raise
            progress.advance(f"level {task.level}")
            return task.result

    async def run_async(self, fn: Callable, arguments: Sequence) -> List[Any]:
        semaphore = asyncio.Semaphore(self.workers)
        progress = Progress(len(arguments), self.label)
        self.tasks = {level: LevelTask(level, arg) for level, arg in enumerate(arguments)}
        # gather keeps submission order, so the reduce is deterministic
        return await asyncio.gather(
            *(self._run_task(task, fn, semaphore, progress) for task in self.tasks.values())
        )

    def run(self, fn: Callable, arguments: Sequence) -> List[Any]:
        logger.info(f"🔄 {self.label}: {len(arguments)} level(s) on {self.workers} worker(s)")
        results = asyncio.run(self.run_async(fn, list(arguments)))
        logger.info(f"✅ {self.label}: done")
        return results

    def get_stats(self) -> dict:
        tasks = self.tasks.values()
        return {
            "total": len(self.tasks),
            "completed": sum(1 for t in tasks if t.status == "completed"),
            "failed": sum(1 for t in tasks if t.status == "failed"),
        }


def run_levels(fn: Callable, arguments: Sequence, label: str = "Levels") -> List[Any]:
    return LevelRunner(label=label).run(fn, arguments)

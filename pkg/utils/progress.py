import logging
import time

logger = logging.getLogger(__name__)


class Progress:
    def __init__(self, total: int, label: str = "Levels"):
        self.total = total
        self.label = label
        self.done = 0
        self.start_time = time.time()

    def generate_progress_bar(self, current: int, total: int, length: int = 20) -> str:
        """Generate progress bar with filled and empty circles"""
        if total == 0:
            return "○" * length

        filled = int(length * current / total)
        return "●" * filled + "○" * (length - filled)

    def format_time(self, seconds: float) -> str:
        if seconds < 60:
            return f"{seconds:.1f}s"
        minutes, secs = divmod(int(seconds), 60)
        return f"{minutes}m, {secs}s"

    def get_progress_text(self, detail: str = "") -> str:
        percentage = (self.done / self.total * 100) if self.total > 0 else 0
        bar = self.generate_progress_bar(self.done, self.total)
        elapsed = self.format_time(time.time() - self.start_time)
        text = f"📊 {self.label} [{bar}] {self.done}/{self.total} ({percentage:.0f}%) in {elapsed}"
        return f"{text} · {detail}" if detail else text

    def advance(self, detail: str = ""):
        """Count one finished level and log the bar"""
        self.done += 1
        logger.info(self.get_progress_text(detail))

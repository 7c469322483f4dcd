"""
Lattice QIP - Base Worker Class
Abstract base class for long-running computations driven by the CLI.
"""

from typing import Any, Callable, List, Optional
from app.utils.logger import get_logger


ProgressCallback = Callable[[int, Optional[str]], None]


class BaseWorker:
    """
    Abstract base class for grid scans, Monte-Carlo runs and file batches.

    Subclasses implement run() and report through the emit_* methods;
    callers subscribe with the on_* methods and call execute().

    Callbacks:
        progress: (percent, message), percent clamped to 0-100
        status: status message
        finished: result object, skipped after cancel()
        error: exception raised inside run()
    """

    def __init__(self):
        self._is_cancelled = False

        self._progress_callbacks: List[ProgressCallback] = []
        self._status_callbacks: List[Callable[[str], None]] = []
        self._finished_callbacks: List[Callable[[Any], None]] = []
        self._error_callbacks: List[Callable[[Exception], None]] = []

        self.result: Any = None
        self.error: Optional[Exception] = None

        self.logger = get_logger(self.__class__.__name__)

    # Callback registration
    def on_progress(self, callback: ProgressCallback):
        self._progress_callbacks.append(callback)

    def on_status(self, callback: Callable[[str], None]):
        self._status_callbacks.append(callback)

    def on_finished(self, callback: Callable[[Any], None]):
        self._finished_callbacks.append(callback)

    def on_error(self, callback: Callable[[Exception], None]):
        self._error_callbacks.append(callback)

    def run(self):
        """
        Do the work. Subclasses check is_cancelled() between blocks, call
        emit_finished() with the result and route exceptions to emit_error().
        """
        raise NotImplementedError("Subclasses must implement run()")

    def execute(self) -> Any:
        """
        Run synchronously and return the result.

        Raises:
            The exception reported through emit_error, if any
        """
        self.run()
        if self.error is not None:
            raise self.error
        return self.result

    def cancel(self):
        """Ask run() to stop at the next block boundary."""
        self._is_cancelled = True
        self.logger.info(f"{self.__class__.__name__}: cancel requested")
        self.emit_status("Cancelling...")

    def is_cancelled(self) -> bool:
        return self._is_cancelled

    def emit_progress(self, value: int, message: Optional[str] = None):
        value = max(0, min(100, int(value)))
        for callback in self._progress_callbacks:
            callback(value, message)

        if message:
            self.emit_status(message)

    def emit_step(self, done: int, total: int, message: Optional[str] = None):
        """Progress of block `done` out of `total`."""
        self.emit_progress(100 * done // max(1, total), message)

    def emit_status(self, message: str):
        for callback in self._status_callbacks:
            callback(message)
        self.logger.debug(message)

    def emit_error(self, exception: Exception):
        """Keep the exception for execute() and notify subscribers."""
        self.error = exception
        for callback in self._error_callbacks:
            callback(exception)
        self.logger.debug(f"{self.__class__.__name__} failed: {exception}", exc_info=True)

    def emit_finished(self, result: Any = None):
        """Store the result unless the worker was cancelled."""
        if self._is_cancelled:
            self.logger.info(f"{self.__class__.__name__}: result dropped after cancel")
            return
        self.result = result
        for callback in self._finished_callbacks:
            callback(result)
        self.logger.debug(f"{self.__class__.__name__} finished")

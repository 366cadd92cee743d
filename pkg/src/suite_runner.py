"""
Suite Runner
Runs independent suite cases concurrently and streams one JSON line per case.

Cases run in a thread pool behind a semaphore; a single writer task drains the
record queue so output lines never interleave.
"""

import asyncio
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, TextIO

from src.config.schemas import CaseStatus, SuiteConfig, SuiteRecord
from src.contraction_cache import ContractionCache
from src.series import WindowUnderflowError
from src.suites import SuiteCase
from src.utils.safe_output import emit_json_line

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_MISMATCH = 1
EXIT_UNDERFLOW = 2
EXIT_ERROR = 1
EXIT_INTERRUPTED = 130


def exit_code_for(records: Sequence[SuiteRecord]) -> int:
    """mismatch > underflow > error > pass"""
    statuses = {record.status for record in records}
    if CaseStatus.FAIL in statuses:
        return EXIT_MISMATCH
    if CaseStatus.UNDERFLOW in statuses:
        return EXIT_UNDERFLOW
    if CaseStatus.ERROR in statuses:
        return EXIT_ERROR
    return EXIT_PASS


class SuiteRunner:
    """
    Evaluates suite cases with bounded parallelism.
    Records reach the writer in completion order; with jobs = 1 that is case order.
    """

    def __init__(self, config: SuiteConfig, stream: Optional[TextIO] = None):
        self.config = config
        self.stream = stream
        self.records: List[SuiteRecord] = []
        self.running_tasks: List[asyncio.Task] = []
        self.is_running = False
        self.interrupted = False

        # Shutdown event
        self.shutdown_event = asyncio.Event()

    def _evaluate(self, case: SuiteCase) -> SuiteRecord:
        try:
            return case.run()
        except WindowUnderflowError as e:
            details = {"exps": [x.doubled for x in e.exps]} if e.exps else {}
            return SuiteRecord(
                suite=case.suite, case=case.name, status=CaseStatus.UNDERFLOW, message=str(e), details=details
            )
        except Exception as e:
            logger.debug(f"case {case.name} raised", exc_info=True)
            return SuiteRecord(
                suite=case.suite, case=case.name, status=CaseStatus.ERROR, message=f"{type(e).__name__}: {e}"
            )

    async def _run_case(
        self,
        case: SuiteCase,
        semaphore: asyncio.Semaphore,
        executor: ThreadPoolExecutor,
        queue: asyncio.Queue,
    ):
        async with semaphore:
            if self.shutdown_event.is_set():
                return
            loop = asyncio.get_running_loop()
            record = await loop.run_in_executor(executor, self._evaluate, case)

        if record.status == CaseStatus.PASS:
            logger.debug(f"✅ {record.suite.value}: {record.case}")
        elif record.status == CaseStatus.FAIL:
            logger.error(f"❌ {record.suite.value}: {record.case} mismatch")
        elif record.status == CaseStatus.UNDERFLOW:
            logger.warning(f"⚠️  {record.suite.value}: {record.case} window underflow: {record.message}")
        else:
            logger.error(f"❌ {record.suite.value}: {record.case} failed with error: {record.message}")
        await queue.put(record)

    async def _writer(self, queue: asyncio.Queue, stream: Optional[TextIO]):
        while True:
            record = await queue.get()
            if record is None:
                break
            emit_json_line(record, stream)
            self.records.append(record)

    def request_shutdown(self):
        if not self.shutdown_event.is_set():
            logger.info("🛑 Shutdown requested, finishing cases in flight...")
            self.interrupted = True
            self.shutdown_event.set()

    async def run(self, cases: Sequence[SuiteCase]) -> int:
        """Run all cases and return the process exit code."""
        logger.info(f"🚀 Running {len(cases)} cases with {self.config.jobs} job(s)")
        ContractionCache().resize(self.config.cache_size)
        self.is_running = True
        queue: asyncio.Queue = asyncio.Queue()
        semaphore = asyncio.Semaphore(self.config.jobs)

        out = open(self.config.output, "w", encoding="utf-8") if self.config.output else None
        writer = asyncio.create_task(self._writer(queue, out or self.stream), name="RecordWriter")
        try:
            with ThreadPoolExecutor(max_workers=self.config.jobs, thread_name_prefix="suite") as executor:
                self.running_tasks = [
                    asyncio.create_task(self._run_case(case, semaphore, executor, queue), name=f"Case_{i}")
                    for i, case in enumerate(cases)
                ]
                results = await asyncio.gather(*self.running_tasks, return_exceptions=True)
                for task, result in zip(self.running_tasks, results):
                    if isinstance(result, BaseException):
                        logger.error(f"❌ {task.get_name()} failed with error: {result}")
        finally:
            await queue.put(None)
            await writer
            if out is not None:
                out.close()
            self.is_running = False
            logger.info(f"📊 Contraction cache: {ContractionCache().get_statistics()}")

        counts = Counter(record.status.value for record in self.records)
        summary = ", ".join(f"{status}={counts[status]}" for status in (s.value for s in CaseStatus))
        code = exit_code_for(self.records)
        if self.interrupted and code == EXIT_PASS:
            code = EXIT_INTERRUPTED
        if code == EXIT_PASS:
            logger.info(f"🎉 All {len(self.records)} cases passed")
        else:
            logger.info(f"Finished {len(self.records)} of {len(cases)} cases: {summary}")
        return code

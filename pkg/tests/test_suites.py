import asyncio
import io
import json

import pytest

from src import suites
from src.config.schemas import CaseStatus, SuiteConfig, SuiteName, SuiteRecord
from src.fock_space import U0, VWord
from src.series import WindowUnderflowError, make_window
from src.suite_runner import (
    EXIT_ERROR,
    EXIT_MISMATCH,
    EXIT_PASS,
    EXIT_UNDERFLOW,
    SuiteRunner,
    exit_code_for,
)
from src.suites import CaseOutcome, SuiteCase, build_cases, expected_d_comm_terms


@pytest.fixture
def small_config():
    return SuiteConfig(M=1, max_weight="1", window=("-3", "3"), shuffle_tables=2)


def record(status: CaseStatus) -> SuiteRecord:
    return SuiteRecord(suite=SuiteName.CRT, case="c", status=status)


def raising(exc):
    def check():
        raise exc

    return check


class TestBuildCases:
    def test_max_cases_per_suite(self, small_config):
        config = small_config.model_copy(update={"max_cases": 2})
        cases = build_cases(SuiteName.ALL, config)
        assert len(cases) == 2 * 5 + 1
        assert {case.suite for case in cases} == set(SuiteName.expand(SuiteName.ALL))

    def test_dcomm(self, small_config):
        (case,) = build_cases(SuiteName.DCOMM, small_config)
        result = case.run()
        assert result.status == CaseStatus.PASS
        assert result.details["terms"] == expected_d_comm_terms()

    def test_crt_cases_pass(self, small_config):
        for case in build_cases(SuiteName.CRT, small_config):
            assert case.run().status == CaseStatus.PASS, case.name

    def test_shuffle_cases_pass(self, small_config):
        config = small_config.model_copy(update={"max_cases": 12})
        for case in build_cases(SuiteName.SHUFFLE, config):
            assert case.run().status == CaseStatus.PASS, case.name

    def test_first_assoc_cases_pass(self, small_config):
        config = small_config.model_copy(update={"max_cases": 4})
        for case in build_cases(SuiteName.ASSOC, config):
            assert case.run().status == CaseStatus.PASS, case.name

    def test_exp_delta_commutators_reach_second_derivative(self, small_config):
        second = [
            case
            for case in build_cases(SuiteName.ASSOC, small_config)
            if case.name.startswith("exp(Delta) commutator") and "^(2)" in case.name
        ]
        assert {case.name.split()[2] for case in second} == {"e1^(2)", "eb1^(2)"}
        for case in second[:4]:
            assert case.run().status == CaseStatus.PASS, case.name

    def test_wick_distinct_form_uses_full_window(self, monkeypatch):
        seen = []
        monkeypatch.setattr(suites, "closed_product_mismatch", lambda *args: None)
        monkeypatch.setattr(suites, "closed_iterate_mismatch", lambda *args: None)
        monkeypatch.setattr(suites, "wick_mismatch", lambda a, b, w, window: seen.append((len(a) + len(b), window)))
        pair = VWord((("e1", 0), ("eb1", 0)))
        window = make_window(-6, 6)
        assert suites._wick_case(pair, pair, U0, window).passed
        assert seen == [(4, window)]

    def test_wick_suite_has_four_letter_cases(self):
        config = SuiteConfig(M=2, max_weight="2", window=("-6", "6"))
        letter_counts = {
            sum(part.count("(") for part in case.name.split(" | ")[:2])
            for case in build_cases(SuiteName.WICK, config)
        }
        assert max(letter_counts) == 4


class TestExitCodes:
    def test_precedence(self):
        assert exit_code_for([]) == EXIT_PASS
        assert exit_code_for([record(CaseStatus.PASS)]) == EXIT_PASS
        assert exit_code_for([record(CaseStatus.ERROR)]) == EXIT_ERROR
        assert exit_code_for([record(CaseStatus.ERROR), record(CaseStatus.UNDERFLOW)]) == EXIT_UNDERFLOW
        assert exit_code_for([record(CaseStatus.UNDERFLOW), record(CaseStatus.FAIL)]) == EXIT_MISMATCH


class TestSuiteRunner:
    def run(self, config, cases):
        stream = io.StringIO()
        runner = SuiteRunner(config, stream=stream)
        code = asyncio.run(runner.run(cases))
        lines = [json.loads(line) for line in stream.getvalue().splitlines()]
        return code, lines, runner

    def test_streams_one_line_per_case(self, small_config):
        cases = [
            SuiteCase(SuiteName.CRT, f"case {i}", lambda: CaseOutcome(True)) for i in range(3)
        ]
        code, lines, runner = self.run(small_config, cases)
        assert code == EXIT_PASS
        assert [line["case"] for line in lines] == ["case 0", "case 1", "case 2"]
        assert all(line["status"] == "pass" for line in lines)
        assert not runner.is_running

    def test_failures_and_exceptions_are_recorded(self, small_config):
        cases = [
            SuiteCase(SuiteName.WICK, "fails", lambda: CaseOutcome(False)),
            SuiteCase(SuiteName.WICK, "underflows", raising(WindowUnderflowError("too small"))),
            SuiteCase(SuiteName.WICK, "breaks", raising(RuntimeError("boom"))),
        ]
        code, lines, _ = self.run(small_config, cases)
        assert code == EXIT_MISMATCH
        statuses = {line["case"]: line["status"] for line in lines}
        assert statuses == {"fails": "fail", "underflows": "underflow", "breaks": "error"}
        error = next(line for line in lines if line["case"] == "breaks")
        assert "RuntimeError: boom" in error["message"]

    def test_underflow_outranks_error(self, small_config):
        cases = [
            SuiteCase(SuiteName.ASSOC, "underflows", raising(WindowUnderflowError("too small"))),
            SuiteCase(SuiteName.ASSOC, "breaks", raising(ValueError("bad"))),
        ]
        code, _, _ = self.run(small_config.model_copy(update={"jobs": 2}), cases)
        assert code == EXIT_UNDERFLOW

    def test_output_file(self, small_config, tmp_path):
        out = tmp_path / "records.jsonl"
        config = small_config.model_copy(update={"output": str(out)})
        code, lines, _ = self.run(config, [SuiteCase(SuiteName.DCOMM, "ok", lambda: CaseOutcome(True))])
        assert code == EXIT_PASS
        assert lines == []
        assert json.loads(out.read_text())["case"] == "ok"

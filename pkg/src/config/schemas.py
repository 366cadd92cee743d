# config/schemas.py
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from src.config.settings import (
    CONTRACTION_CACHE_SIZE,
    DEFAULT_JOBS,
    DEFAULT_M,
    DEFAULT_MAX_WEIGHT,
    DEFAULT_MAX_ZERO_MODES,
    DEFAULT_SEED,
    DEFAULT_SHUFFLE_TABLES,
    DEFAULT_WINDOW,
)

# --- Enums for Suites and Statuses ---


class SuiteName(str, Enum):
    WICK = "wick"
    ASSOC = "assoc"
    SHUFFLE = "shuffle"
    CRT = "crt"
    AXIOMS = "axioms"
    DCOMM = "dcomm"
    ALL = "all"

    @classmethod
    def expand(cls, name: "SuiteName") -> List["SuiteName"]:
        if name == cls.ALL:
            return [s for s in cls if s != cls.ALL]
        return [name]


class CaseStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    UNDERFLOW = "underflow"  # coefficient outside the certified window
    ERROR = "error"


def _is_half_integer(value: str) -> bool:
    try:
        return (Fraction(value.strip()) * 2).denominator == 1
    except (ValueError, ZeroDivisionError):
        return False


# --- Run configuration ---


class SuiteConfig(BaseModel):
    """Bounds and plumbing for one CLI run; every suite reads the same record."""

    M: int = Field(DEFAULT_M, ge=1, description="Half-rank of h = C^{2M}")
    max_weight: str = Field(DEFAULT_MAX_WEIGHT, description="Largest total weight of generated test words, in (1/2)Z")
    window: Tuple[str, str] = Field(DEFAULT_WINDOW, description="Exponent window [lo, hi] for coefficient comparisons")
    seed: int = Field(DEFAULT_SEED, description="Seed for random tables and sampled points")
    jobs: int = Field(DEFAULT_JOBS, ge=1, description="Number of suite cases evaluated concurrently")
    output: Optional[str] = Field(None, description="JSON-lines output path; stdout when unset")
    strict: bool = Field(False, description="Treat region violations as errors")
    max_zero_modes: int = Field(DEFAULT_MAX_ZERO_MODES, ge=0, description="Zero-mode cap for W basis words")
    max_cases: Optional[int] = Field(None, ge=1, description="Stop each suite after this many cases")
    shuffle_tables: int = Field(DEFAULT_SHUFFLE_TABLES, ge=1, description="Random tables per shuffle-identity shape")
    cache_size: int = Field(CONTRACTION_CACHE_SIZE, ge=1, description="Entry cap of the shared contraction memo")

    @field_validator("max_weight", mode="before")
    @classmethod
    def _check_weight(cls, value):
        value = str(value)
        if not _is_half_integer(value) or Fraction(value) < 0:
            raise ValueError(f"max_weight must be a non-negative half-integer, got {value!r}")
        return value.strip()

    @field_validator("window", mode="before")
    @classmethod
    def _check_window(cls, value):
        if isinstance(value, str):
            value = value.replace(":", ",").split(",")
        lo, hi = (str(v).strip() for v in value)
        for bound in (lo, hi):
            if not _is_half_integer(bound):
                raise ValueError(f"window bounds must be half-integers, got {bound!r}")
        return lo, hi

    @model_validator(mode="after")
    def _check_nonempty(self):
        lo, hi = self.window
        if Fraction(lo) > Fraction(hi):
            raise ValueError(f"window [{lo}, {hi}] is empty")
        return self


# --- Result records ---


class ElementTerm(BaseModel):
    """One term of a Fock-space element: letters as [label, m] pairs, W zero modes listed separately."""

    word: List[Tuple[str, int]] = Field(..., description="Negative-mode letters as (label, m)")
    zeros: List[str] = Field([], description="Zero-mode labels, W side only")
    coeff: str = Field(..., description="Exact rational coefficient 'p/q'")


Value = Union[str, List[ElementTerm]]


class Mismatch(BaseModel):
    exps: List[int] = Field(..., description="Exponents of the first differing coefficient, doubled")
    lhs: Value = Field(..., description="Left-hand coefficient")
    rhs: Value = Field(..., description="Right-hand coefficient")


class SuiteRecord(BaseModel):
    """
    One JSON line per suite case.
    Written to: stdout or --out
    """

    suite: SuiteName = Field(..., description="Suite the case belongs to")
    case: str = Field(..., description="Human-readable case descriptor")
    status: CaseStatus = Field(..., description="Outcome of the case")
    first_mismatch: Optional[Mismatch] = Field(None, description="First differing coefficient, if any")
    message: Optional[str] = Field(None, description="Error or underflow diagnostic")
    details: Dict[str, Any] = Field({}, description="Suite-specific report data")


class AssocReport(BaseModel):
    v1: str = Field(..., description="Left algebra element")
    v2: str = Field(..., description="Right algebra element")
    w: str = Field(..., description="Module element")
    P: int = Field(..., description="Pole-order exponent used")
    window: Tuple[int, int] = Field(..., description="Compared exponent window, doubled")
    status: CaseStatus = Field(..., description="pass iff all compared coefficients agree exactly")
    compared: int = Field(0, description="Number of coefficients compared")
    first_mismatch: Optional[Mismatch] = Field(None, description="First differing coefficient")


class AxiomReport(BaseModel):
    checks: Dict[str, bool] = Field(..., description="Sub-check name -> passed")
    failures: List[str] = Field([], description="Descriptions of failed sub-checks")

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


class DCommReport(BaseModel):
    """Normal-ordered form of [D_W, :a1(1)a2(0) + a1(0)a2(1):] under the hypothesised derivation."""

    terms: Dict[str, str] = Field(..., description="Canonical normal-ordered word -> coefficient")
    scalar: str = Field(..., description="Coefficient of the identity")
    obstruction: str = Field(..., description="Coefficient of :a2(0)a1(0):")
    obstructed: bool = Field(..., description="True when no derivation D_W is consistent with the bracket")
    unsigned_terms: Dict[str, str] = Field(
        {},
        description="The same bracket when :a1(1)a2(0): is reordered to a2(0)a1(1) without its sign; "
        "the a2(-1)a1(1) and a2(0)a1(0) coefficients flip",
    )


class CorrelatorRecord(BaseModel):
    """
    Numerical product / iterate / closed-form values at one point.
    Written to: stdout
    """

    z1: Tuple[float, float] = Field(..., description="(re, im) of z1")
    z2: Tuple[float, float] = Field(..., description="(re, im) of z2")
    p: int = Field(..., description="Branch index")
    cutoff: int = Field(..., description="Series cutoff actually used")
    product_value: Optional[Tuple[float, float]] = Field(None, description="Product series partial sum")
    product_error: Optional[float] = Field(None, description="Geometric tail estimate of the product sum")
    iterate_value: Optional[Tuple[float, float]] = Field(None, description="Iterate series partial sum")
    iterate_error: Optional[float] = Field(None, description="Geometric tail estimate of the iterate sum")
    closed_form_value: Optional[Tuple[float, float]] = Field(None, description="Reconstructed algebraic function f^{p,p}")
    closed_form: Optional[str] = Field(None, description="Reconstructed correlator as text")
    reconstruction: Dict[str, Any] = Field(
        {}, description="How the closed form was accepted: terms used and the vanishing tail length (heuristic)"
    )
    abs_errors: Dict[str, float] = Field({}, description="Pairwise absolute differences")
    region_flags: Dict[str, bool] = Field({}, description="product / iterate region membership")
    branch_mismatch: bool = Field(False, description="Iterate converged but disagrees with f^{p,p}")

"""Pydantic models for reports and API requests and responses"""
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class CheckResult(BaseModel):
    """Outcome of one verification check"""
    name: str
    passed: bool
    location: str = ""
    counterexample: str = ""
    expected_failure: bool = False

    @property
    def status(self) -> str:
        if self.passed:
            return "PASS"
        return "XFAIL" if self.expected_failure else "FAIL"

    @property
    def counts(self) -> bool:
        """Expected failures are reported but do not fail the suite"""
        return self.passed or self.expected_failure


class Report(BaseModel):
    """Result of a verification suite"""
    suite: str
    seed: int
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.counts for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.counts]

    def render_text(self) -> str:
        lines = []
        for check in self.checks:
            line = f"{check.status} {check.name}"
            if check.location:
                line += f" @ {check.location}"
            if check.counterexample and not check.passed:
                line += f" :: {check.counterexample}"
            lines.append(line)
        xfail = sum(1 for c in self.checks if c.status == "XFAIL")
        lines.append(
            f"{self.suite}: {len(self.checks)} checks, {len(self.failures)} failed, {xfail} expected failures (seed {self.seed})"
        )
        return "\n".join(lines)


class EvalRequest(BaseModel):
    """Forcing query payload"""
    formula: str = Field(..., min_length=1, description="Formula in concrete syntax")
    space: Optional[str] = Field(None, description="Built-in space name or space file contents")
    ring: Optional[str] = Field(None, description='Ring spec such as "zmod 12"')
    open: Optional[str] = Field(None, description="Named open to evaluate on (default: the whole space)")
    declare: Dict[str, str] = Field(default_factory=dict, description="Free variables and their sorts")
    bindings: Dict[str, str] = Field(default_factory=dict, description="Section labels for declared variables")

    class Config:
        json_schema_extra = {
            "example": {
                "space": "sierpinski",
                "formula": "~~U",
            }
        }


class EvalResponse(BaseModel):
    """Forcing verdict"""
    formula: str
    open: str
    forced: bool
    truth_value: str


class TranslateRequest(BaseModel):
    """Translation payload"""
    formula: str = Field(..., min_length=1, description="Formula in concrete syntax")
    nucleus: str = Field("j", min_length=1, description="Name of the modal operator")
    elide_gray: bool = Field(False, description="Omit the boxes that do not change the meaning")


class TranslateResponse(BaseModel):
    """Translated formula"""
    formula: str
    translated: str
    elided_gray_boxes: bool


class SpecResponse(BaseModel):
    """Spectrum of a finite ring"""
    ring: str
    size: int
    frame: List[str]
    points: List[str]
    sections: Dict[str, int]


class HealthResponse(BaseModel):
    """Health check response"""
    status: str
    version: str
    spaces_loaded: int


class TruthResponse(BaseModel):
    """Largest open on which a formula holds"""
    formula: str
    truth_value: str
    points: List[str]


class SheafifyRequest(BaseModel):
    """Sheafification payload"""
    space: str = Field(..., min_length=1, description="Built-in space name or space file contents")
    sheaf: str = Field(..., min_length=1, description="Sheaf file contents")
    nucleus: str = Field("negneg", description="negneg, id, open_U, closed_U or point_x")
    plus_only: bool = Field(False, description="Apply the plus construction once instead of twice")


class SheafifyResponse(BaseModel):
    """Sections of the sheafified sheaf per open"""
    sheaf: str
    nucleus: str
    sections: Dict[str, List[str]]
    separated: bool
    is_sheaf: bool
    unit_injective: bool


class VerifyRequest(BaseModel):
    """Corpus overrides for a verification suite"""
    seed: Optional[int] = Field(None, description="Corpus seed (default from settings)")
    count: Optional[int] = Field(None, ge=1, le=200, description="Number of random instances")
    max_points: Optional[int] = Field(None, ge=1, le=8)
    max_depth: Optional[int] = Field(None, ge=0, le=6)
    space: Optional[str] = Field(None, description="Restrict the corpus to one space")
    ring: Optional[str] = Field(None, description="Restrict the corpus to one ring")

    class Config:
        json_schema_extra = {
            "example": {
                "ring": "zmod 12",
            }
        }

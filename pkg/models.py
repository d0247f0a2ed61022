from enum import Enum
from typing import Iterable, List

from pydantic import BaseModel, Field


class Status(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"
    INFO = "INFO"


class Record(BaseModel):
    key: str
    status: Status
    detail: str = ""


class Report(BaseModel):
    """Ordered (key, status, detail) records with an overall verdict.

    FAIL dominates INCONCLUSIVE, which dominates PASS. INFO records never
    affect the verdict.
    """

    title: str
    records: List[Record] = Field(default_factory=list)

    def add(self, key: str, status: Status, detail: str = "") -> "Report":
        self.records.append(Record(key=key, status=status, detail=detail))
        return self

    @property
    def verdict(self) -> Status:
        statuses = {r.status for r in self.records}
        if Status.FAIL in statuses:
            return Status.FAIL
        if Status.INCONCLUSIVE in statuses:
            return Status.INCONCLUSIVE
        return Status.PASS

    @property
    def passed(self) -> bool:
        return self.verdict == Status.PASS

    def failures(self) -> List[Record]:
        return [r for r in self.records if r.status == Status.FAIL]

    @classmethod
    def merge(cls, title: str, reports: Iterable["Report"]) -> "Report":
        merged = cls(title=title)
        for report in reports:
            for record in report.records:
                merged.records.append(record.model_copy(update={"key": f"{report.title}/{record.key}"}))
        return merged

    def machine_lines(self) -> List[str]:
        lines = [f"{r.key}\t{r.status.value}\t{r.detail}" for r in self.records]
        lines.append(f"verdict\t{self.verdict.value}\t{self.title}")
        return lines

    def human_lines(self) -> List[str]:
        lines = [f"== {self.title} =="]
        for r in self.records:
            detail = f"  ({r.detail})" if r.detail else ""
            lines.append(f"[{r.status.value}] {r.key}{detail}")
        lines.append(f"verdict: {self.verdict.value}")
        return lines


# Every check_* operation returns one of these
ValidationReport = Report

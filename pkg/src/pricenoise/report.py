"""Claim-by-claim verification reports in text, key=value and CSV form."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import metadata

from .noisegen import RNG_ID


def toolkit_version() -> str:
    try:
        return metadata.version("pricenoise")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _num(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


@dataclass
class ClaimResult:
    claim_id: str
    anchor: str
    measured: float
    expected: str
    tolerance: str
    passed: bool
    seed: int | None = None
    runtime: float | None = None
    details: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    suite: str
    entries: list[ClaimResult]
    flags: dict = field(default_factory=dict)
    version: str = field(default_factory=toolkit_version)
    rng: str = RNG_ID
    timings: bool = False

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def to_text(self) -> str:
        lines = [
            f"pricenoise verification report: suite={self.suite}",
            f"version: {self.version}",
            f"rng: {self.rng}",
            "flags: " + " ".join(f"{k}={_num(v)}" for k, v in sorted(self.flags.items())),
            "",
        ]
        for e in self.entries:
            status = "PASS" if e.passed else "FAIL"
            lines.append(f"[{status}] {e.claim_id}: {e.anchor}")
            lines.append(f"    measured={_num(e.measured)} expected={e.expected} tolerance={e.tolerance}"
                         + (f" seed={e.seed}" if e.seed is not None else ""))
            for key, value in e.details.items():
                lines.append(f"    {key}={_num(value)}")
            if self.timings and e.runtime is not None:
                lines.append(f"    runtime_s={e.runtime:.3f}")
        n_pass = sum(e.passed for e in self.entries)
        lines += ["", f"overall: {'PASS' if self.passed else 'FAIL'} ({n_pass}/{len(self.entries)} claims)"]
        return "\n".join(lines) + "\n"

    def to_kv(self) -> str:
        """One ``key=value`` per line; keys are ``<claim_id>.<field>``."""
        lines = [f"suite={self.suite}", f"version={self.version}", f"rng={self.rng}"]
        lines += [f"flag.{k}={_num(v)}" for k, v in sorted(self.flags.items())]
        for e in self.entries:
            lines.append(f"{e.claim_id}.pass={_num(e.passed)}")
            lines.append(f"{e.claim_id}.measured={_num(e.measured)}")
            lines.append(f"{e.claim_id}.expected={e.expected}")
            lines.append(f"{e.claim_id}.tolerance={e.tolerance}")
            if e.seed is not None:
                lines.append(f"{e.claim_id}.seed={e.seed}")
            for key, value in e.details.items():
                lines.append(f"{e.claim_id}.{key}={_num(value)}")
            if self.timings and e.runtime is not None:
                lines.append(f"{e.claim_id}.runtime_s={e.runtime:.3f}")
        lines.append(f"overall.pass={_num(self.passed)}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["claim_id", "anchor", "measured", "expected", "tolerance", "pass", "seed"])
        for e in self.entries:
            w.writerow([e.claim_id, e.anchor, _num(e.measured), e.expected, e.tolerance,
                        _num(e.passed), "" if e.seed is None else e.seed])
        return buf.getvalue()

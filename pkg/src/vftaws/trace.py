from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class BuildLog:
    """Per-recursion-level records written by the builders.

    Every record is a dict with a ``kind`` and an ``ok`` flag, so invariant
    audits reduce to counting records with ``ok == False``.
    """

    records: list = field(default_factory=list)

    def add(self, kind: str, ok: bool, **info) -> None:
        self.records.append({"kind": kind, "ok": bool(ok), **info})

    def of_kind(self, kind: str) -> list:
        return [r for r in self.records if r["kind"] == kind]

    def violations(self, kind: str | None = None) -> list:
        return [r for r in self.records if not r["ok"] and (kind is None or r["kind"] == kind)]

    def summary(self) -> dict:
        out: dict = {}
        for r in self.records:
            tot, bad = out.get(r["kind"], (0, 0))
            out[r["kind"]] = (tot + 1, bad + (0 if r["ok"] else 1))
        return {k: {"levels": v[0], "violations": v[1]} for k, v in sorted(out.items())}

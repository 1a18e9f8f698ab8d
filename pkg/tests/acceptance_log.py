"""Collects the one-line verdicts printed by the acceptance suite."""

LINES: list[str] = []


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}: {detail}"
    LINES.append(line)
    print(line)

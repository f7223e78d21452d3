"""Per-criterion outcomes collected during the acceptance run."""

RESULTS: dict = {}


def record(number: int, name: str, ok: bool, detail: str) -> None:
    RESULTS[number] = (name, bool(ok), detail)


def lines() -> list[str]:
    return [f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
            for n, (name, ok, detail) in sorted(RESULTS.items())]

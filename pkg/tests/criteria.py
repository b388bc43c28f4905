"""Collects one PASS/FAIL line per acceptance criterion for the run summary."""

import contextlib
import time

RESULTS: list[str] = []


class Check:
    def __init__(self):
        self.ok = True
        self.notes: list[str] = []

    def expect(self, cond, note):
        if not cond:
            self.ok = False
        self.notes.append(f"{note}{'' if cond else ' [FAILED]'}")


@contextlib.contextmanager
def criterion(number: int, title: str):
    chk = Check()
    t0 = time.perf_counter()
    try:
        yield chk
    except BaseException as exc:
        chk.ok = False
        chk.notes.append(f"error: {type(exc).__name__}: {exc}")
        raise
    finally:
        status = "PASS" if chk.ok else "FAIL"
        line = (f"criterion {number}: {status} {title} ({time.perf_counter() - t0:.1f}s)"
                f" {'; '.join(chk.notes)}")
        print(line)
        RESULTS.append(line)
    assert chk.ok, "; ".join(chk.notes)

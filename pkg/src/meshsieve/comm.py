"""Deterministic in-process process group.

Each rank runs the same program on its own thread. The only communication
primitive is :meth:`Comm.exchange`, a collective neighbor exchange of byte
buffers. A phase completes once every rank has posted its sends, and the
message log (the transcript) is recorded in (phase, source, destination)
order, so it does not depend on thread scheduling.
"""

from __future__ import annotations

import threading
from typing import Any, Callable, Dict, List, NamedTuple, Optional

from .errors import CollectiveMismatchError, CommError, GroupAborted

DEFAULT_TIMEOUT = 60.0


class Message(NamedTuple):
    phase: int
    tag: str
    src: int
    dst: int
    nbytes: int


class Comm:
    """Per-rank handle passed to rank programs."""

    def __init__(self, group: "ProcessGroup", rank: int):
        self.group = group
        self.rank = rank
        self.size = group.size
        self._phase = 0

    def __repr__(self):
        return f"Comm(rank={self.rank}, size={self.size})"

    def exchange(self, sends: Dict[int, bytes], tag: str = "") -> Dict[int, bytes]:
        """Post ``sends`` (destination -> buffer) and return buffers addressed
        to this rank keyed by source, in ascending source order."""
        clean = {}
        for dst, buf in sends.items():
            dst = int(dst)
            if not 0 <= dst < self.size:
                raise CommError(f"rank {self.rank} sent to rank {dst} outside group of {self.size}")
            clean[dst] = bytes(buf)
        phase = self._phase
        self._phase += 1
        return self.group._post(self.rank, phase, tag, clean)


class ProcessGroup:
    def __init__(self, size: int, timeout: float = DEFAULT_TIMEOUT):
        if size < 1:
            raise CommError(f"group size must be at least 1, got {size}")
        self.size = size
        self.timeout = timeout
        self.transcript: List[Message] = []
        self._reset()

    def _reset(self):
        self._cond = threading.Condition()
        self._phase = 0
        self._pending: Dict[int, tuple] = {}
        self._inbox: Dict[int, Dict[int, Dict[int, bytes]]] = {}
        self._finished = 0
        self._error: Optional[BaseException] = None

    def run(self, program: Callable[..., Any], *args, **kwargs) -> List[Any]:
        """Run ``program(comm, *args, **kwargs)`` on every rank; return results by rank."""
        self._reset()
        self.transcript = []
        results: List[Any] = [None] * self.size
        errors: List[Optional[BaseException]] = [None] * self.size

        def body(rank):
            try:
                results[rank] = program(Comm(self, rank), *args, **kwargs)
            except BaseException as exc:  # noqa: BLE001 - re-raised by run()
                errors[rank] = exc
                with self._cond:
                    if self._error is None and not isinstance(exc, GroupAborted):
                        self._error = exc
                    self._cond.notify_all()
            finally:
                with self._cond:
                    self._finished += 1
                    self._cond.notify_all()

        if self.size == 1:
            body(0)
        else:
            threads = [threading.Thread(target=body, args=(r,), daemon=True)
                       for r in range(self.size)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        for exc in errors:
            if exc is not None and not isinstance(exc, GroupAborted):
                raise exc
        for exc in errors:
            if exc is not None:
                raise exc
        return results

    def _post(self, rank: int, phase: int, tag: str, sends: Dict[int, bytes]) -> Dict[int, bytes]:
        with self._cond:
            self._check_alive(rank, phase)
            if phase != self._phase:
                raise CollectiveMismatchError(
                    f"rank {rank} entered phase {phase} while group is in phase {self._phase}")
            self._pending[rank] = (tag, sends)
            if len(self._pending) == self.size:
                self._deliver()
            else:
                ok = self._cond.wait_for(
                    lambda: phase in self._inbox or self._error is not None or self._finished > 0,
                    timeout=self.timeout)
                if not ok:
                    raise CollectiveMismatchError(
                        f"rank {rank} timed out waiting in phase {phase} ({tag!r})")
            if phase not in self._inbox:
                self._check_alive(rank, phase)
            box = self._inbox[phase]
            received = box.pop(rank)
            if not box:
                del self._inbox[phase]
            return received

    def _check_alive(self, rank, phase):
        if self._error is not None:
            raise GroupAborted(f"rank {rank}: group aborted by an error in another rank")
        if self._finished > 0:
            raise CollectiveMismatchError(
                f"rank {rank} waits in phase {phase} but another rank already returned")

    def _deliver(self):
        tags = {tag for tag, _ in self._pending.values()}
        if len(tags) > 1:
            detail = ", ".join(f"rank {r}: {t!r}" for r, (t, _) in sorted(self._pending.items()))
            self._error = CollectiveMismatchError(f"phase {self._phase} tag mismatch ({detail})")
            self._cond.notify_all()
            raise self._error
        tag = tags.pop()
        box: Dict[int, Dict[int, bytes]] = {r: {} for r in range(self.size)}
        for src in range(self.size):
            _, sends = self._pending[src]
            for dst in sorted(sends):
                box[dst][src] = sends[dst]
                self.transcript.append(Message(self._phase, tag, src, dst, len(sends[dst])))
        self._inbox[self._phase] = box
        self._pending = {}
        self._phase += 1
        self._cond.notify_all()

    def dump_transcript(self) -> str:
        return "".join(f"{m.phase} {m.tag} {m.src} {m.dst} {m.nbytes}\n" for m in self.transcript)


def run_group(size: int, program: Callable[..., Any], *args, **kwargs) -> List[Any]:
    return ProcessGroup(size).run(program, *args, **kwargs)

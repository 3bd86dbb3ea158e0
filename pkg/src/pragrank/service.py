"""HTTP service hosting live communication sessions against masked listeners.

Each session shows one target program and two robots ("green" and "blue"),
randomly wired to the literal listener and the ranked listener.  The client
never learns which is which until it asks /reveal.  Examples are validated
against the target before they reach a listener, so robot histories only
ever contain consistent utterances.  Handlers are synchronous and take a
per-session lock; the shared domain artifacts are immutable.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .bundles import DomainBundle
from .errors import NoConsistentProgramError
from .harness import LiteralListener, RankedListener

__all__ = ["create_app", "ROBOT_LABELS", "LISTENER_KINDS"]

ROBOT_LABELS = ("green", "blue")
LISTENER_KINDS = ("L0", "L_sigma")


class CreateSessionRequest(BaseModel):
    domain: str


class ExampleRequest(BaseModel):
    robot: str
    utterance: str


class GiveupRequest(BaseModel):
    robot: str


@dataclass
class RobotState:
    kind: str  # which listener answers for this robot; never sent unmasked
    listener: object
    history: list[str] = field(default_factory=list)
    guesses: list[dict] = field(default_factory=list)
    status: str = "active"

    @property
    def turn(self) -> int:
        return len(self.history)


@dataclass
class Session:
    session_id: str
    domain: str
    bundle: DomainBundle
    target: int
    robots: dict[str, RobotState]
    lock: threading.Lock = field(default_factory=threading.Lock)
    created_at: float = field(default_factory=time.time)
    events: list[dict] = field(default_factory=list)


def _masked_state(session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "domain": session.domain,
        "target_id": session.bundle.lex.hypotheses[session.target],
        "target_rendered": session.bundle.render(session.bundle.lex.hypotheses[session.target]),
        "robots": {
            label: {
                "status": robot.status,
                "turn": robot.turn,
                "history": list(robot.history),
                "guesses": list(robot.guesses),
            }
            for label, robot in session.robots.items()
        },
    }


def create_app(
    bundles: dict[str, DomainBundle],
    seed: int = 0,
    stimuli: dict[str, list[str]] | None = None,
    event_log_path=None,
) -> FastAPI:
    """Build the app over prebuilt bundles.

    `stimuli` optionally restricts session targets per domain; the default
    pool is every program.  Targets are drawn without replacement until the
    pool is exhausted, then the pool reshuffles.
    """
    app = FastAPI(title="pragrank synthesis sessions")
    rng = np.random.default_rng(seed)
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    log_lock = threading.Lock()

    pools: dict[str, list[int]] = {}

    def _draw_target(domain: str) -> int:
        bundle = bundles[domain]
        pool = pools.get(domain)
        if not pool:
            ids = stimuli.get(domain) if stimuli else None
            indices = (
                [bundle.lex.hypothesis_index(i) for i in ids]
                if ids
                else list(range(bundle.lex.n))
            )
            rng.shuffle(indices)
            pools[domain] = pool = indices
        return pool.pop()

    def _get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def _get_robot(session: Session, label: str) -> RobotState:
        robot = session.robots.get(label)
        if robot is None:
            raise HTTPException(status_code=422, detail=f"robot must be one of {list(ROBOT_LABELS)}")
        return robot

    def _log_event(session: Session, label: str, robot: RobotState) -> None:
        if event_log_path is None:
            return
        tag = "H0" if robot.kind == "L0" else "H1"
        target_id = session.bundle.lex.hypotheses[session.target]
        line = f"{tag}\t{target_id}\t{';'.join(robot.history)}\n"
        with log_lock:
            with open(event_log_path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(line)

    @app.get("/domains")
    def list_domains() -> list[dict]:
        return [
            {
                "name": name,
                "kind": b.kind,
                "programs": b.lex.n,
                "utterances": b.lex.m,
            }
            for name, b in bundles.items()
        ]

    @app.post("/sessions")
    def create_session(body: CreateSessionRequest) -> dict:
        bundle = bundles.get(body.domain)
        if bundle is None:
            raise HTTPException(status_code=422, detail=f"unknown domain {body.domain!r}")
        with registry_lock:
            target = _draw_target(body.domain)
            kinds = list(LISTENER_KINDS)
            if rng.integers(2):
                kinds.reverse()
            robots = {}
            for label, kind in zip(ROBOT_LABELS, kinds):
                listener = (
                    LiteralListener(bundle.lex, bundle.prior)
                    if kind == "L0"
                    else RankedListener(bundle.sigma, bundle.lex)
                )
                robots[label] = RobotState(kind=kind, listener=listener)
            session = Session(
                session_id=uuid.uuid4().hex[:12],
                domain=body.domain,
                bundle=bundle,
                target=target,
                robots=robots,
            )
            sessions[session.session_id] = session
        return {
            "session_id": session.session_id,
            "domain": session.domain,
            "target_id": bundle.lex.hypotheses[target],
            "target_rendered": bundle.render(bundle.lex.hypotheses[target]),
            "robot_labels": list(ROBOT_LABELS),
        }

    @app.post("/sessions/{session_id}/examples")
    def submit_example(session_id: str, body: ExampleRequest) -> dict:
        session = _get_session(session_id)
        with session.lock:
            robot = _get_robot(session, body.robot)
            if robot.status != "active":
                raise HTTPException(status_code=409, detail=f"robot is {robot.status}")
            lex = session.bundle.lex
            if not lex.has_utterance(body.utterance):
                raise HTTPException(status_code=422, detail=f"malformed example {body.utterance!r}")
            u = lex.utterance_index(body.utterance)
            if not lex.matrix[u, session.target]:
                raise HTTPException(status_code=422, detail="inconsistent example")
            robot.history.append(body.utterance)
            us = [lex.utterance_index(x) for x in robot.history]
            try:
                top = robot.listener.topk(us, k=1)
                guess = int(top[0])
            except NoConsistentProgramError:  # unreachable: history is consistent
                raise HTTPException(status_code=422, detail="no consistent program")
            solved = guess == session.target
            guess_id = lex.hypotheses[guess]
            payload = {
                "robot": body.robot,
                "turn": robot.turn,
                "guess_id": guess_id,
                "guess_rendered": session.bundle.render(guess_id),
                "solved": solved,
                "status": robot.status,
            }
            robot.guesses.append({"turn": robot.turn, "guess_id": guess_id, "solved": solved})
            if solved:
                robot.status = "solved"
                payload["status"] = "solved"
                _log_event(session, body.robot, robot)
            session.events.append({"at": time.time(), "robot": body.robot, "utterance": body.utterance})
            return payload

    @app.post("/sessions/{session_id}/giveup")
    def give_up(session_id: str, body: GiveupRequest) -> dict:
        session = _get_session(session_id)
        with session.lock:
            robot = _get_robot(session, body.robot)
            if robot.status != "active":
                raise HTTPException(status_code=409, detail=f"robot is {robot.status}")
            robot.status = "given_up"
            if robot.history:
                _log_event(session, body.robot, robot)
            return {"robot": body.robot, "status": robot.status}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        session = _get_session(session_id)
        with session.lock:
            return _masked_state(session)

    @app.get("/sessions/{session_id}/reveal")
    def reveal(session_id: str) -> dict:
        session = _get_session(session_id)
        with session.lock:
            return {label: robot.kind for label, robot in session.robots.items()}

    return app

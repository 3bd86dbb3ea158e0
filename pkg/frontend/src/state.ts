// View state and its transitions. Everything shown to the user is derived
// from server payloads plus the example currently being typed or awaiting
// acknowledgment; no guesses are ever computed client-side.

import type {
  ExampleResult,
  GuessEntry,
  Rendered,
  SessionCreated,
  SessionSnapshot,
} from "./api.js";

export type RobotStatus = "active" | "solved" | "given_up";

export interface RobotPanel {
  label: string;
  status: RobotStatus;
  history: string[];
  guesses: GuessEntry[];
  // rendering from the latest acknowledgment; after a reload only the
  // guess id is known, which for regex domains is itself the source
  guessRendered: Rendered | null;
  // utterance sent but not yet acknowledged (at most one per robot)
  inFlight: string | null;
  notice: string | null;
}

export interface ViewState {
  sessionId: string;
  domain: string;
  domainKind: "regex" | "grid";
  targetId: string;
  targetRendered: Rendered;
  robots: Record<string, RobotPanel>;
  revealed: Record<string, string> | null;
  toast: string | null;
}

export const GRID_TOKENS = ["P", "Cr", "Cg", "Cb", "Pr", "Pg", "Pb"];

function freshPanel(label: string): RobotPanel {
  return {
    label,
    status: "active",
    history: [],
    guesses: [],
    guessRendered: null,
    inFlight: null,
    notice: null,
  };
}

function renderedFromId(kind: "regex" | "grid", guessId: string): Rendered | null {
  return kind === "regex" ? { kind: "regex", source: guessId } : null;
}

export function fromCreated(created: SessionCreated): ViewState {
  const robots: Record<string, RobotPanel> = {};
  for (const label of created.robot_labels) robots[label] = freshPanel(label);
  return {
    sessionId: created.session_id,
    domain: created.domain,
    domainKind: created.target_rendered.kind,
    targetId: created.target_id,
    targetRendered: created.target_rendered,
    robots,
    revealed: null,
    toast: null,
  };
}

export function fromSnapshot(snap: SessionSnapshot): ViewState {
  const kind = snap.target_rendered.kind;
  const robots: Record<string, RobotPanel> = {};
  for (const [label, r] of Object.entries(snap.robots)) {
    const last = r.guesses.length > 0 ? r.guesses[r.guesses.length - 1] : null;
    robots[label] = {
      label,
      status: r.status as RobotStatus,
      history: [...r.history],
      guesses: [...r.guesses],
      guessRendered: last ? renderedFromId(kind, last.guess_id) : null,
      inFlight: null,
      notice: null,
    };
  }
  return {
    sessionId: snap.session_id,
    domain: snap.domain,
    domainKind: kind,
    targetId: snap.target_id,
    targetRendered: snap.target_rendered,
    robots,
    revealed: null,
    toast: null,
  };
}

export function canSubmit(panel: RobotPanel): boolean {
  return panel.status === "active" && panel.inFlight === null;
}

const GRID_EXAMPLE = new RegExp(`^([0-6]):([0-6]):(${GRID_TOKENS.join("|")})$`);

// returns an error message, or null when the text is submittable
export function validateExample(kind: "regex" | "grid", text: string): string | null {
  if (kind === "regex") {
    if (text.length === 0) return "type a string over 0 and 1";
    if (!/^[01]+$/.test(text)) return "examples are strings over the alphabet {0, 1}";
    return null;
  }
  if (!GRID_EXAMPLE.test(text)) return "pick a cell on the target grid";
  return null;
}

function withPanel(state: ViewState, label: string, panel: RobotPanel): ViewState {
  return { ...state, robots: { ...state.robots, [label]: panel } };
}

export function beginSubmit(state: ViewState, label: string, text: string): ViewState {
  const panel = state.robots[label];
  if (!canSubmit(panel)) return state;
  return withPanel(state, label, { ...panel, inFlight: text, notice: null });
}

export function applyResult(state: ViewState, label: string, result: ExampleResult): ViewState {
  const panel = state.robots[label];
  const utterance = panel.inFlight ?? "";
  return withPanel(state, label, {
    ...panel,
    status: result.status as RobotStatus,
    history: [...panel.history, utterance],
    guesses: [...panel.guesses, { turn: result.turn, guess_id: result.guess_id, solved: result.solved }],
    guessRendered: result.guess_rendered,
    inFlight: null,
    notice: null,
  });
}

// 422: the example was refused; history and guesses are unchanged
export function applyRejection(state: ViewState, label: string, message: string): ViewState {
  const panel = state.robots[label];
  return withPanel(state, label, { ...panel, inFlight: null, notice: message });
}

// 409: the robot was already terminal; surface a toast, change nothing else
export function applyConflict(state: ViewState, label: string, message: string): ViewState {
  const panel = state.robots[label];
  return { ...withPanel(state, label, { ...panel, inFlight: null }), toast: message };
}

// network failure: keep the in-flight example so it can be retried
export function applyNetworkFailure(state: ViewState, label: string): ViewState {
  const panel = state.robots[label];
  return withPanel(state, label, { ...panel, notice: "connection failed; retry" });
}

export function applyGiveup(state: ViewState, label: string, status: string): ViewState {
  const panel = state.robots[label];
  return withPanel(state, label, { ...panel, status: status as RobotStatus, inFlight: null, notice: null });
}

export function applyReveal(state: ViewState, kinds: Record<string, string>): ViewState {
  return { ...state, revealed: kinds };
}

// after a failed round trip, a fresh snapshot decides whether the pending
// example actually landed (avoids duplicating it on retry)
export function pendingLanded(panel: RobotPanel, snap: SessionSnapshot): boolean {
  const server = snap.robots[panel.label];
  if (!server || panel.inFlight === null) return false;
  return server.history.length > panel.history.length && server.history[panel.history.length] === panel.inFlight;
}

export function gridUtterance(rows: string[][], x: number, y: number): string {
  return `${x}:${y}:${rows[y][x]}`;
}

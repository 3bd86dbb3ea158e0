// @vitest-environment jsdom
import { beforeEach, describe, expect, it, vi } from "vitest";

import type { SessionCreated } from "../src/api.js";
import {
  applyResult,
  applyReveal,
  beginSubmit,
  fromCreated,
  GRID_TOKENS,
  type ViewState,
} from "../src/state.js";
import { render, type Handlers } from "../src/ui.js";

function noopHandlers(): Handlers {
  return {
    onSubmit: vi.fn(),
    onRetry: vi.fn(),
    onGiveup: vi.fn(),
    onReveal: vi.fn(),
    onPick: vi.fn(),
  };
}

const REGEX_CREATED: SessionCreated = {
  session_id: "abc123",
  domain: "regex-small",
  target_id: "0+1{3}",
  target_rendered: { kind: "regex", source: "0+1{3}" },
  robot_labels: ["green", "blue"],
};

function gridRows(): string[][] {
  const rows: string[][] = [];
  for (let y = 0; y < 7; y++) {
    const row: string[] = [];
    for (let x = 0; x < 7; x++) {
      row.push(GRID_TOKENS[(x + y) % GRID_TOKENS.length]);
    }
    rows.push(row);
  }
  return rows;
}

const GRID_CREATED: SessionCreated = {
  session_id: "def456",
  domain: "animals",
  target_id: "box 1 5 1 6 2 chicken pebble x z%2",
  target_rendered: { kind: "grid", rows: gridRows() },
  robot_labels: ["green", "blue"],
};

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '<main id="app"></main>';
  root = document.getElementById("app")!;
});

describe("target rendering", () => {
  it("shows a regex target as source text", () => {
    render(root, fromCreated(REGEX_CREATED), noopHandlers());
    const code = root.querySelector(".target .regex-source");
    expect(code?.textContent).toBe("0+1{3}");
  });

  it("shows a grid target as a 7x7 board with token classes", () => {
    render(root, fromCreated(GRID_CREATED), noopHandlers());
    const cells = root.querySelectorAll(".target td.cell");
    expect(cells).toHaveLength(49);
    expect(root.querySelectorAll(".target td.cell-P").length).toBeGreaterThan(0);
    expect(root.querySelectorAll(".target td.cell-Pb").length).toBeGreaterThan(0);
  });

  it("clicking a target cell picks the x:y:token utterance", () => {
    const handlers = noopHandlers();
    render(root, fromCreated(GRID_CREATED), handlers);
    const rows = root.querySelectorAll(".target tr");
    const cell = rows[2]!.querySelectorAll("td")[4]!;
    cell.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    const rendered = GRID_CREATED.target_rendered as { kind: "grid"; rows: string[][] };
    expect(handlers.onPick).toHaveBeenCalledWith(`4:2:${rendered.rows[2]![4]}`);
  });
});

describe("robot panels", () => {
  it("renders one panel per robot with status badges", () => {
    render(root, fromCreated(REGEX_CREATED), noopHandlers());
    const panels = root.querySelectorAll(".panel");
    expect(panels).toHaveLength(2);
    expect(panels[0]!.querySelector("h2")?.textContent).toContain("green");
    expect(panels[0]!.querySelector(".badge-active")?.textContent).toBe("playing");
  });

  it("marks solved robots and disables their inputs", () => {
    let state: ViewState = fromCreated(REGEX_CREATED);
    state = beginSubmit(state, "green", "0111");
    state = applyResult(state, "green", {
      robot: "green",
      turn: 1,
      guess_id: "0+1{3}",
      guess_rendered: { kind: "regex", source: "0+1{3}" },
      solved: true,
      status: "solved",
    });
    render(root, state, noopHandlers());
    const panel = root.querySelector(".panel")!;
    expect(panel.querySelector(".badge-solved")?.textContent).toBe("solved");
    expect(panel.querySelector<HTMLInputElement>(".example-input")!.disabled).toBe(true);
    expect(panel.querySelector<HTMLButtonElement>(".feed-button")!.disabled).toBe(true);
    expect(panel.querySelector<HTMLButtonElement>(".giveup-button")!.disabled).toBe(true);
  });

  it("shows the latest guess and the example history", () => {
    let state: ViewState = fromCreated(REGEX_CREATED);
    state = beginSubmit(state, "green", "01");
    state = applyResult(state, "green", {
      robot: "green",
      turn: 1,
      guess_id: "0*1*",
      guess_rendered: { kind: "regex", source: "0*1*" },
      solved: false,
      status: "active",
    });
    render(root, state, noopHandlers());
    const panel = root.querySelector(".panel")!;
    expect(panel.querySelector(".guess .regex-source")?.textContent).toBe("0*1*");
    const items = panel.querySelectorAll(".history li");
    expect(items).toHaveLength(1);
    expect(items[0]!.textContent).toBe("01");
  });

  it("disables submission while an example is in flight", () => {
    let state: ViewState = fromCreated(REGEX_CREATED);
    state = beginSubmit(state, "green", "01");
    render(root, state, noopHandlers());
    const panels = root.querySelectorAll(".panel");
    expect(panels[0]!.querySelector<HTMLButtonElement>(".feed-button")!.disabled).toBe(true);
    expect(panels[1]!.querySelector<HTMLButtonElement>(".feed-button")!.disabled).toBe(false);
  });

  it("submits the typed example through the handler", () => {
    const handlers = noopHandlers();
    render(root, fromCreated(REGEX_CREATED), handlers);
    const panel = root.querySelectorAll(".panel")[1]!;
    panel.querySelector<HTMLInputElement>(".example-input")!.value = "010";
    panel.querySelector<HTMLButtonElement>(".feed-button")!.click();
    expect(handlers.onSubmit).toHaveBeenCalledWith("blue", "010");
  });

  it("flags invalid input locally instead of submitting", () => {
    const handlers = noopHandlers();
    render(root, fromCreated(REGEX_CREATED), handlers);
    const panel = root.querySelector(".panel")!;
    panel.querySelector<HTMLInputElement>(".example-input")!.value = "abc";
    panel.querySelector<HTMLButtonElement>(".feed-button")!.click();
    expect(handlers.onSubmit).not.toHaveBeenCalled();
    expect(panel.querySelector(".notice")?.textContent).toMatch(/alphabet/);
  });
});

describe("identity masking", () => {
  it("never names listener kinds before reveal", () => {
    render(root, fromCreated(REGEX_CREATED), noopHandlers());
    expect(root.textContent).not.toContain("L0");
    expect(root.textContent).not.toContain("L_sigma");
  });

  it("labels each robot with its kind after reveal", () => {
    let state: ViewState = fromCreated(REGEX_CREATED);
    state = applyReveal(state, { green: "L_sigma", blue: "L0" });
    render(root, state, noopHandlers());
    const kinds = [...root.querySelectorAll(".panel .kind")].map((n) => n.textContent);
    expect(kinds).toEqual(["L_sigma", "L0"]);
    expect(root.querySelector<HTMLButtonElement>(".reveal-button")!.disabled).toBe(true);
  });
});

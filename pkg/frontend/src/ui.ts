// DOM rendering. The whole app container is rebuilt from the view state;
// handlers are injected so this module never talks to the network.

import type { Rendered } from "./api.js";
import { canSubmit, gridUtterance, validateExample, type RobotPanel, type ViewState } from "./state.js";

export interface Handlers {
  onSubmit(label: string, text: string): void;
  onRetry(label: string): void;
  onGiveup(label: string): void;
  onReveal(): void;
  onPick(utterance: string): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderRendered(rendered: Rendered, pickable: boolean, handlers?: Handlers): HTMLElement {
  if (rendered.kind === "regex") {
    return el("code", "regex-source", rendered.source);
  }
  const table = el("table", "grid");
  rendered.rows.forEach((row, y) => {
    const tr = el("tr");
    row.forEach((token, x) => {
      const td = el("td", `cell cell-${token}`, token);
      if (pickable && handlers) {
        td.classList.add("pickable");
        td.addEventListener("click", () => handlers.onPick(gridUtterance(rendered.rows, x, y)));
      }
      tr.appendChild(td);
    });
    table.appendChild(tr);
  });
  return table;
}

const STATUS_BADGES: Record<string, string> = {
  active: "playing",
  solved: "solved",
  given_up: "gave up",
};

function renderPanel(state: ViewState, panel: RobotPanel, handlers: Handlers): HTMLElement {
  const root = el("section", `panel panel-${panel.label}`);
  root.dataset.robot = panel.label;

  const head = el("header");
  head.appendChild(el("h2", undefined, `robot ${panel.label}`));
  head.appendChild(el("span", `badge badge-${panel.status}`, STATUS_BADGES[panel.status] ?? panel.status));
  head.appendChild(el("span", "turn", `turn ${panel.history.length}`));
  if (state.revealed) {
    head.appendChild(el("span", "kind", state.revealed[panel.label]));
  }
  root.appendChild(head);

  const history = el("ul", "history");
  for (const utterance of panel.history) {
    history.appendChild(el("li", "example", utterance === "" ? "(empty)" : utterance));
  }
  root.appendChild(history);

  const guess = el("div", "guess");
  if (panel.guessRendered) {
    guess.appendChild(el("span", "guess-label", "current guess"));
    guess.appendChild(renderRendered(panel.guessRendered, false));
  } else if (panel.guesses.length > 0) {
    const last = panel.guesses[panel.guesses.length - 1];
    guess.appendChild(el("span", "guess-label", "current guess"));
    guess.appendChild(el("code", "guess-id", last.guess_id));
  } else {
    guess.appendChild(el("span", "guess-label", "no guess yet"));
  }
  root.appendChild(guess);

  if (panel.notice) {
    root.appendChild(el("p", "notice", panel.notice));
  }

  const form = el("div", "feed");
  const input = el("input", "example-input");
  input.type = "text";
  input.placeholder = state.domainKind === "regex" ? "example string" : "x:y:token (click the target)";
  input.value = panel.inFlight ?? "";
  input.disabled = !canSubmit(panel);

  const feed = el("button", "feed-button", "feed example");
  feed.disabled = !canSubmit(panel);
  feed.addEventListener("click", () => {
    const message = validateExample(state.domainKind, input.value);
    if (message) {
      root.querySelector(".notice")?.remove();
      const notice = el("p", "notice", message);
      root.insertBefore(notice, form);
      return;
    }
    handlers.onSubmit(panel.label, input.value);
  });

  const giveup = el("button", "giveup-button", "give up");
  giveup.disabled = panel.status !== "active";
  giveup.addEventListener("click", () => handlers.onGiveup(panel.label));

  form.appendChild(input);
  form.appendChild(feed);
  form.appendChild(giveup);

  if (panel.inFlight !== null && panel.notice !== null) {
    const retry = el("button", "retry-button", "retry");
    retry.addEventListener("click", () => handlers.onRetry(panel.label));
    form.appendChild(retry);
  }

  root.appendChild(form);
  return root;
}

export function render(root: HTMLElement, state: ViewState, handlers: Handlers): void {
  root.textContent = "";

  const target = el("section", "target");
  target.appendChild(el("h2", undefined, "your secret program"));
  target.appendChild(renderRendered(state.targetRendered, state.domainKind === "grid", handlers));
  if (state.domainKind === "grid") {
    target.appendChild(el("p", "hint", "click a cell to stage it as the next example"));
  }
  root.appendChild(target);

  const panels = el("div", "panels");
  for (const label of Object.keys(state.robots)) {
    panels.appendChild(renderPanel(state, state.robots[label], handlers));
  }
  root.appendChild(panels);

  const footer = el("footer");
  const reveal = el("button", "reveal-button", state.revealed ? "revealed" : "reveal robots");
  reveal.disabled = state.revealed !== null;
  reveal.addEventListener("click", () => handlers.onReveal());
  footer.appendChild(reveal);
  if (state.toast) {
    footer.appendChild(el("span", "toast", state.toast));
  }
  root.appendChild(footer);
}

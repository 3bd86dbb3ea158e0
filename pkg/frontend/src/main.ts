// Wiring: a small controller owning the view state, and page bootstrap.
// The controller is exported so tests can drive the same code paths the
// buttons use.

import { ApiError, Client, NetworkError } from "./api.js";
import {
  applyConflict,
  applyGiveup,
  applyNetworkFailure,
  applyRejection,
  applyResult,
  applyReveal,
  beginSubmit,
  canSubmit,
  fromCreated,
  fromSnapshot,
  pendingLanded,
  validateExample,
  type ViewState,
} from "./state.js";
import { render, type Handlers } from "./ui.js";

export class Controller {
  private state: ViewState | null = null;
  private chain: Promise<void> = Promise.resolve();

  readonly handlers: Handlers = {
    onSubmit: (label, text) => this.track(this.submit(label, text)),
    onRetry: (label) => this.track(this.retry(label)),
    onGiveup: (label) => this.track(this.giveUp(label)),
    onReveal: () => this.track(this.reveal()),
    onPick: (utterance) => this.fillInputs(utterance),
  };

  constructor(
    private readonly root: HTMLElement,
    private readonly client: Client,
  ) {}

  getState(): ViewState {
    if (!this.state) throw new Error("no session");
    return this.state;
  }

  // resolves once every action started so far has finished
  idle(): Promise<void> {
    return this.chain;
  }

  private track(p: Promise<unknown>): void {
    this.chain = this.chain.then(() => p.then(() => undefined)).catch(() => undefined);
  }

  private dispatch(next: ViewState): void {
    this.state = next;
    render(this.root, next, this.handlers);
  }

  private fillInputs(utterance: string): void {
    for (const input of this.root.querySelectorAll<HTMLInputElement>(".example-input")) {
      if (!input.disabled) input.value = utterance;
    }
  }

  async create(domain: string): Promise<ViewState> {
    const created = await this.client.createSession(domain);
    this.dispatch(fromCreated(created));
    return this.getState();
  }

  async restore(sessionId: string): Promise<ViewState> {
    const snap = await this.client.getSession(sessionId);
    this.dispatch(fromSnapshot(snap));
    return this.getState();
  }

  async submit(label: string, text: string): Promise<ViewState> {
    const state = this.getState();
    const message = validateExample(state.domainKind, text);
    if (message) {
      this.dispatch(applyRejection(state, label, message));
      return this.getState();
    }
    if (!canSubmit(state.robots[label])) return state;
    this.dispatch(beginSubmit(state, label, text));
    await this.send(label);
    return this.getState();
  }

  // retry after a network failure, without duplicating an example that
  // already reached the server
  async retry(label: string): Promise<ViewState> {
    const state = this.getState();
    const panel = state.robots[label];
    if (panel.inFlight === null) return state;
    const snap = await this.client.getSession(state.sessionId);
    if (pendingLanded(panel, snap)) {
      this.dispatch({ ...fromSnapshot(snap), revealed: state.revealed });
    } else {
      await this.send(label);
    }
    return this.getState();
  }

  private async send(label: string): Promise<void> {
    const state = this.getState();
    const text = state.robots[label].inFlight;
    if (text === null) return;
    try {
      const result = await this.client.submitExample(state.sessionId, label, text);
      this.dispatch(applyResult(this.getState(), label, result));
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        this.dispatch(applyRejection(this.getState(), label, err.detail));
      } else if (err instanceof ApiError && err.status === 409) {
        const snap = await this.client.getSession(state.sessionId);
        this.dispatch({ ...fromSnapshot(snap), revealed: this.getState().revealed, toast: err.detail });
      } else if (err instanceof NetworkError) {
        this.dispatch(applyNetworkFailure(this.getState(), label));
      } else {
        throw err;
      }
    }
  }

  async giveUp(label: string): Promise<ViewState> {
    const state = this.getState();
    try {
      const res = await this.client.giveUp(state.sessionId, label);
      this.dispatch(applyGiveup(this.getState(), label, res.status));
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.dispatch(applyConflict(this.getState(), label, err.detail));
      } else {
        throw err;
      }
    }
    return this.getState();
  }

  async reveal(): Promise<ViewState> {
    const state = this.getState();
    const kinds = await this.client.reveal(state.sessionId);
    this.dispatch(applyReveal(this.getState(), kinds));
    return this.getState();
  }
}

function sessionFromHash(): string | null {
  const match = /session=([0-9a-f]+)/.exec(window.location.hash);
  return match ? match[1] : null;
}

async function chooseDomain(root: HTMLElement, client: Client, controller: Controller): Promise<void> {
  const domains = await client.domains();
  root.textContent = "";
  const chooser = document.createElement("section");
  chooser.className = "chooser";
  const title = document.createElement("h2");
  title.textContent = "pick a domain";
  chooser.appendChild(title);
  for (const d of domains) {
    const button = document.createElement("button");
    button.className = "domain-button";
    button.textContent = `${d.name} (${d.programs} programs)`;
    button.addEventListener("click", () => {
      void controller.create(d.name).then((state) => {
        window.location.hash = `session=${state.sessionId}`;
      });
    });
    chooser.appendChild(button);
  }
  root.appendChild(chooser);
}

async function boot(root: HTMLElement): Promise<void> {
  const client = new Client(window.location.origin.replace(/^file:.*/, "http://127.0.0.1:8000"));
  const controller = new Controller(root, client);
  const sessionId = sessionFromHash();
  if (sessionId) {
    try {
      await controller.restore(sessionId);
      return;
    } catch {
      window.location.hash = "";
    }
  }
  await chooseDomain(root, client, controller);
}

const appRoot = typeof document === "undefined" ? null : document.getElementById("app");
if (appRoot) {
  void boot(appRoot);
}

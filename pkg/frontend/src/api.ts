// Typed client for the session service. All game knowledge lives on the
// server; this module only moves JSON.

export type Rendered =
  | { kind: "regex"; source: string }
  | { kind: "grid"; rows: string[][] };

export interface DomainInfo {
  name: string;
  kind: string;
  programs: number;
  utterances: number;
}

export interface SessionCreated {
  session_id: string;
  domain: string;
  target_id: string;
  target_rendered: Rendered;
  robot_labels: string[];
}

export interface ExampleResult {
  robot: string;
  turn: number;
  guess_id: string;
  guess_rendered: Rendered;
  solved: boolean;
  status: string;
}

export interface GuessEntry {
  turn: number;
  guess_id: string;
  solved: boolean;
}

export interface RobotSnapshot {
  status: string;
  turn: number;
  history: string[];
  guesses: GuessEntry[];
}

export interface SessionSnapshot {
  session_id: string;
  domain: string;
  target_id: string;
  target_rendered: Rendered;
  robots: Record<string, RobotSnapshot>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

export class NetworkError extends Error {}

export class Client {
  constructor(readonly base: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let res: Response;
    try {
      res = await fetch(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new NetworkError(err instanceof Error ? err.message : String(err));
    }
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const data = (await res.json()) as { detail?: unknown };
        if (typeof data.detail === "string") detail = data.detail;
        else if (data.detail !== undefined) detail = JSON.stringify(data.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  domains(): Promise<DomainInfo[]> {
    return this.request("GET", "/domains");
  }

  createSession(domain: string): Promise<SessionCreated> {
    return this.request("POST", "/sessions", { domain });
  }

  submitExample(sessionId: string, robot: string, utterance: string): Promise<ExampleResult> {
    return this.request("POST", `/sessions/${sessionId}/examples`, { robot, utterance });
  }

  giveUp(sessionId: string, robot: string): Promise<{ robot: string; status: string }> {
    return this.request("POST", `/sessions/${sessionId}/giveup`, { robot });
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  reveal(sessionId: string): Promise<Record<string, string>> {
    return this.request("GET", `/sessions/${sessionId}/reveal`);
  }
}

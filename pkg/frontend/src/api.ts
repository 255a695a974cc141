import type { FeedbackBody, ModelInfoDoc, PredictionDoc, SchemaDoc } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public fields: string[] = [],
  ) {
    super(message);
  }
}

const TOKEN_KEY = "cgpakit.token";

/** Session token storage; falls back to memory when sessionStorage is absent. */
export class TokenStore {
  private memory: string | null = null;

  get(): string | null {
    try {
      return window.sessionStorage.getItem(TOKEN_KEY);
    } catch {
      return this.memory;
    }
  }

  set(token: string | null): void {
    try {
      if (token === null) window.sessionStorage.removeItem(TOKEN_KEY);
      else window.sessionStorage.setItem(TOKEN_KEY, token);
    } catch {
      this.memory = token;
    }
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    public tokens: TokenStore = new TokenStore(),
  ) {}

  get authenticated(): boolean {
    return this.tokens.get() !== null;
  }

  logout(): void {
    this.tokens.set(null);
  }

  private async request<T>(method: string, path: string, body?: unknown, auth = false): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (auth) {
      const token = this.tokens.get();
      if (!token) throw new ApiError(401, "TokenInvalid", "not logged in");
      headers["Authorization"] = `Bearer ${token}`;
    }
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, "NetworkError", `cannot reach the server: ${String(err)}`);
    }
    const text = await response.text();
    let doc: any = {};
    if (text) {
      try {
        doc = JSON.parse(text);
      } catch {
        throw new ApiError(response.status, "BadResponse", "server returned non-JSON");
      }
    }
    if (!response.ok) {
      throw new ApiError(
        response.status,
        doc.code ?? "HttpError",
        doc.message ?? response.statusText,
        doc.fields ?? [],
      );
    }
    return doc as T;
  }

  async register(email: string, credential: string): Promise<string> {
    const doc = await this.request<{ user_id: string }>("POST", "/api/register", {
      email,
      credential,
    });
    return doc.user_id;
  }

  async login(email: string, credential: string): Promise<void> {
    const doc = await this.request<{ token: string }>("POST", "/api/login", {
      email,
      credential,
    });
    this.tokens.set(doc.token);
  }

  schema(): Promise<SchemaDoc> {
    return this.request<SchemaDoc>("GET", "/api/schema");
  }

  predict(input: Record<string, string | number>): Promise<PredictionDoc> {
    return this.request<PredictionDoc>("POST", "/api/predict", { input }, true);
  }

  feedback(body: FeedbackBody): Promise<{ feedback_id: string }> {
    return this.request<{ feedback_id: string }>("POST", "/api/feedback", body, true);
  }

  modelInfo(): Promise<ModelInfoDoc> {
    return this.request<ModelInfoDoc>("GET", "/api/model/info");
  }
}

import type {
  DisplayDocument,
  MetricsPayload,
  ServiceError,
  SessionResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: ServiceError,
  ) {
    super(`${detail.code}: ${detail.message}`);
  }
}

/** Thin fetch wrapper over the session service; no client-side logic. */
export class ApiClient {
  constructor(private baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, payload as ServiceError);
    }
    return payload as T;
  }

  uploadApp(document: unknown): Promise<{ app_id: string }> {
    return this.request("POST", "/apps", document);
  }

  getStg(appId: string): Promise<DisplayDocument> {
    return this.request("GET", `/apps/${appId}/stg`);
  }

  startSession(appId: string, idleThresholdMs?: number): Promise<SessionResponse> {
    return this.request("POST", "/sessions", {
      app_id: appId,
      ...(idleThresholdMs !== undefined ? { idle_threshold_ms: idleThresholdMs } : {}),
    });
  }

  postAction(sessionId: string, actionId: string, tMs?: number): Promise<SessionResponse> {
    return this.request("POST", `/sessions/${sessionId}/action`, {
      action_id: actionId,
      ...(tMs !== undefined ? { t_ms: tMs } : {}),
    });
  }

  postIdleTick(sessionId: string, nowMs: number): Promise<SessionResponse> {
    return this.request("POST", `/sessions/${sessionId}/idle-tick`, { now_ms: nowMs });
  }

  getMetrics(sessionId: string): Promise<MetricsPayload> {
    return this.request("GET", `/sessions/${sessionId}/metrics`);
  }
}

import { ApiClient, ApiError } from "./client.js";
import { renderScreen, type ScreenView } from "./render.js";
import { buildGraphPanel, type GraphPanelView } from "./stgMap.js";
import type { DisplayDocument, Gesture, SessionResponse } from "./types.js";

export interface AppView {
  screen: ScreenView;
  graph: GraphPanelView;
  toast: string | null;
  deviation: boolean;
}

export type ViewListener = (view: AppView) => void;

/**
 * Session controller. Every user gesture maps to exactly one service call
 * and one re-render; requests are queued so at most one is in flight. The
 * client owns only a 1 s idle timer; the server decides when to replan.
 */
export class ExplorerApp {
  private latest: SessionResponse | null = null;
  private display: DisplayDocument | null = null;
  private queue: Promise<unknown> = Promise.resolve();
  private listeners: ViewListener[] = [];
  private startedAt = 0;
  private idleTimer: ReturnType<typeof setInterval> | null = null;
  private toast: string | null = null;

  constructor(
    private client: ApiClient,
    private now: () => number = () => Date.now(),
  ) {}

  onRender(listener: ViewListener): void {
    this.listeners.push(listener);
  }

  get sessionId(): string {
    return this.lastResponse.session_id;
  }

  get lastResponse(): SessionResponse {
    if (this.latest === null) throw new Error("no live session");
    return this.latest;
  }

  get view(): AppView {
    if (this.latest === null || this.display === null) throw new Error("no live session");
    return {
      screen: renderScreen(this.latest),
      graph: buildGraphPanel(this.display, this.latest),
      toast: this.toast,
      deviation: this.latest.deviation,
    };
  }

  private enqueue<T>(work: () => Promise<T>): Promise<T> {
    const next = this.queue.then(work);
    this.queue = next.catch(() => undefined);
    return next;
  }

  private rerender(): void {
    const view = this.view;
    for (const listener of this.listeners) listener(view);
  }

  async start(appId: string, idleThresholdMs?: number): Promise<AppView> {
    return this.enqueue(async () => {
      this.display = await this.client.getStg(appId);
      this.latest = await this.client.startSession(appId, idleThresholdMs);
      this.startedAt = this.now();
      this.toast = null;
      this.rerender();
      return this.view;
    });
  }

  /** Client timer with 1 s granularity; the server owns the threshold. */
  startIdleTicks(): void {
    if (this.idleTimer !== null) return;
    this.idleTimer = setInterval(() => void this.sendIdleTick(), 1000);
  }

  stopIdleTicks(): void {
    if (this.idleTimer !== null) {
      clearInterval(this.idleTimer);
      this.idleTimer = null;
    }
  }

  async sendIdleTick(): Promise<AppView> {
    return this.enqueue(async () => {
      this.latest = await this.client.postIdleTick(this.sessionId, this.elapsed());
      this.rerender();
      return this.view;
    });
  }

  private elapsed(): number {
    return this.now() - this.startedAt;
  }

  /** Map a gesture to an outgoing action of the current screen, if any. */
  resolveGesture(gesture: Gesture): string | null {
    if (this.latest === null) return null;
    const outgoing = this.latest.screen.outgoing;
    const match = outgoing.find((a) =>
      gesture.kind === "back"
        ? a.trigger === "back"
        : a.trigger === gesture.kind && a.component_ref === gesture.componentId,
    );
    return match?.action_id ?? null;
  }

  async interact(gesture: Gesture): Promise<AppView> {
    return this.enqueue(async () => {
      const actionId = this.resolveGesture(gesture);
      if (actionId === null) {
        this.toast = "no such action here";
        this.rerender();
        return this.view;
      }
      try {
        this.latest = await this.client.postAction(this.sessionId, actionId, this.elapsed());
        this.toast = null;
      } catch (err) {
        if (err instanceof ApiError && err.status === 404) {
          this.toast = "session expired - restart required";
        } else if (err instanceof ApiError) {
          this.toast = err.detail.message;
        } else {
          this.toast = "network failure - retry";
        }
      }
      this.rerender();
      return this.view;
    });
  }

  /** Convenience for scripted sessions: take the currently hinted action. */
  async followHint(): Promise<AppView> {
    return this.enqueue(async () => {
      const hint = this.latest?.hint;
      if (!hint) return this.view;
      this.latest = await this.client.postAction(this.sessionId, hint.action_id, this.elapsed());
      this.toast = null;
      this.rerender();
      return this.view;
    });
  }
}

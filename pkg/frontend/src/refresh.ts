/** Debounced forecast refresh with latest-wins cancellation.
 *
 * Slider drags fire many edits; requests go out at most once per debounce
 * window, and a response is delivered only if no newer request was started
 * (the in-flight one is also aborted). */

import { ApiClient, ForecastResponse } from "./api.js";
import type { ScenarioState } from "./scenario.js";

export const DEBOUNCE_MS = 300;

export class ForecastRefresher {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private requestCounter = 0;
  private inFlight: AbortController | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly onResult: (state: ScenarioState, response: ForecastResponse) => void,
    private readonly onError: (err: unknown) => void,
    private readonly delayMs: number = DEBOUNCE_MS,
  ) {}

  /** (Re)arm the debounce timer for this state; the newest state wins. */
  schedule(state: ScenarioState): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.issue(state);
    }, this.delayMs);
  }

  /** Fire immediately (initial load, programmatic replays). */
  flush(state: ScenarioState): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    return this.issue(state);
  }

  private async issue(state: ScenarioState): Promise<void> {
    const ticket = ++this.requestCounter;
    this.inFlight?.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    try {
      const response = await this.api.postForecast(
        {
          route: state.route,
          class_vector: state.classVector.slice(),
          months: state.months,
          seed: state.seed,
        },
        controller.signal,
      );
      if (ticket === this.requestCounter) this.onResult(state, response);
    } catch (err) {
      if (controller.signal.aborted) return; // superseded; stay quiet
      if (ticket === this.requestCounter) this.onError(err);
    }
  }
}

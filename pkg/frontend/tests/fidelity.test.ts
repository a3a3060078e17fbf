/** Console fidelity: replaying the scripted slider sequence must display
 * exactly the ranges the CLI prints for the same class vectors and seed.
 *
 * The fixture was captured from the real service, with each response
 * cross-checked against `rangecast forecast` output at capture time. Requests
 * are matched by exact body, so any drift in the state machine or request
 * wiring fails loudly. Set SERVICE_URL to run against a live service instead.
 */

import { describe, expect, it } from "vitest";

import fixture from "./fixtures/console_fixture.json";
import { ApiClient, ForecastResponse } from "../src/api.js";
import { formatRange, formatSig } from "../src/format.js";
import { ForecastRefresher } from "../src/refresh.js";
import {
  ScenarioState,
  editClass,
  isExtrapolating,
  newScenario,
  setHalf,
  withResponse,
} from "../src/scenario.js";

interface Step {
  op: { op: string; fill?: number; index?: number; value?: number; half?: number };
  class_vector: number[];
  response: ForecastResponse;
  cli_printed_low: string;
  cli_printed_high: string;
}

const steps = fixture.steps as unknown as Step[];

function applyOp(state: ScenarioState | null, op: Step["op"]): ScenarioState {
  if (op.op === "init") {
    return newScenario(fixture.route, fixture.months, fixture.seed, op.fill);
  }
  if (!state) throw new Error("script must start with init");
  if (op.op === "edit") return editClass(state, op.index!, op.value!);
  if (op.op === "half") return setHalf(state, op.half!, op.value!);
  throw new Error(`unknown op ${op.op}`);
}

function fixtureApi(): ApiClient {
  return new ApiClient("", async (url, init) => {
    if (!url.endsWith("/api/forecast")) throw new Error(`unexpected ${url}`);
    const body = JSON.parse(String(init?.body));
    const match = steps.find(
      (s) => JSON.stringify(s.class_vector) === JSON.stringify(body.class_vector),
    );
    if (!match || body.seed !== fixture.seed || body.route !== fixture.route) {
      throw new Error(`request does not match the script: ${init?.body}`);
    }
    return new Response(JSON.stringify(match.response), { status: 200 });
  });
}

function liveApi(): ApiClient | null {
  const base = process.env.SERVICE_URL;
  return base ? new ApiClient(base) : null;
}

describe("console fidelity", () => {
  it("every displayed range equals the CLI output for the same vector and seed",
    async () => {
      const api = liveApi() ?? fixtureApi();
      let displayed = "";
      let lastResponse: ForecastResponse | null = null;
      let state: ScenarioState | null = null;
      const refresher = new ForecastRefresher(
        api,
        (s, response) => {
          state = withResponse(s, response);
          lastResponse = response;
          displayed = formatRange(response.low, response.high);
        },
        (err) => {
          throw err;
        },
        0,
      );

      for (const step of steps) {
        state = applyOp(state, step.op);
        expect(state.classVector).toEqual(step.class_vector);
        await refresher.flush(state);

        expect(lastResponse).not.toBeNull();
        const { low, high } = lastResponse!;
        // displayed string is derived from the payload, nothing else
        expect(displayed).toBe(formatRange(low, high));
        const [shownLow, shownHigh] = displayed.slice(1, -1).split(", ");
        // ...and matches the CLI's printed range at display precision
        expect(formatSig(Number(step.cli_printed_low))).toBe(shownLow);
        expect(formatSig(Number(step.cli_printed_high))).toBe(shownHigh);
        expect(low).toBeCloseTo(Number(step.cli_printed_low), 1);
        expect(high).toBeCloseTo(Number(step.cli_printed_high), 1);
      }
    });

  it("extrapolation badge appears exactly when any class exceeds 1", () => {
    let state: ScenarioState | null = null;
    for (const step of steps) {
      state = applyOp(state, step.op);
      const expected = step.class_vector.some((v) => v > 1);
      expect(isExtrapolating(state)).toBe(expected);
    }
    // the script must exercise both badge states
    const badges = steps.map((s) => s.class_vector.some((v) => v > 1));
    expect(badges).toContain(true);
    expect(badges).toContain(false);
  });

  it("replaying the same edits reproduces identical ranges (fixed seed)", async () => {
    const api = fixtureApi();
    const ranges: string[] = [];
    const refresher = new ForecastRefresher(
      api,
      (_s, response) => ranges.push(formatRange(response.low, response.high)),
      (err) => {
        throw err;
      },
      0,
    );
    for (let round = 0; round < 2; round++) {
      let state: ScenarioState | null = null;
      for (const step of steps) {
        state = applyOp(state, step.op);
        await refresher.flush(state);
      }
    }
    expect(ranges.slice(0, steps.length)).toEqual(ranges.slice(steps.length));
  });
});

/** Scenario state: a route, a horizon class vector, the last service response,
 * and named saved snapshots for side-by-side comparison.
 *
 * Class values live in [0, 1.5]; anything above 1 is flagged as extrapolating
 * beyond the training domain. The scenario seed is fixed at creation so
 * replaying the same edits reproduces identical ranges. */

import type { ForecastResponse } from "./api.js";

export const CLASS_MIN = 0;
export const CLASS_MAX = 1.5;
export const HALF_LENGTH = 6;

export interface ScenarioState {
  readonly route: string;
  readonly months: number;
  readonly seed: number;
  readonly classVector: readonly number[];
  readonly lastResponse: ForecastResponse | null;
}

export interface SavedScenario {
  readonly name: string;
  readonly state: ScenarioState;
}

export function newScenario(
  route: string,
  months: number,
  seed: number,
  fill = 0.5,
): ScenarioState {
  if (months < 12 || months > 15) {
    throw new Error(`horizon must be 12-15 months, got ${months}`);
  }
  checkClassValue(fill);
  return {
    route,
    months,
    seed,
    classVector: Object.freeze(new Array(months).fill(fill)),
    lastResponse: null,
  };
}

export function checkClassValue(value: number): void {
  if (!Number.isFinite(value) || value < CLASS_MIN || value > CLASS_MAX) {
    throw new Error(`class value must be in [${CLASS_MIN}, ${CLASS_MAX}], got ${value}`);
  }
}

export function editClass(
  state: ScenarioState,
  monthIndex: number,
  value: number,
): ScenarioState {
  if (monthIndex < 0 || monthIndex >= state.months) {
    throw new Error(`month index ${monthIndex} outside horizon 0..${state.months - 1}`);
  }
  checkClassValue(value);
  const vector = state.classVector.slice();
  vector[monthIndex] = value;
  return { ...state, classVector: Object.freeze(vector) };
}

/** Half-mode: one slider move sets six consecutive months at once. */
export function setHalf(
  state: ScenarioState,
  halfIndex: number,
  value: number,
): ScenarioState {
  if (halfIndex !== 0 && halfIndex !== 1) {
    throw new Error(`half index must be 0 or 1, got ${halfIndex}`);
  }
  checkClassValue(value);
  const begin = halfIndex * HALF_LENGTH;
  if (begin + HALF_LENGTH > state.months) {
    throw new Error("half extends past the horizon");
  }
  const vector = state.classVector.slice();
  for (let i = begin; i < begin + HALF_LENGTH; i++) vector[i] = value;
  return { ...state, classVector: Object.freeze(vector) };
}

export function withResponse(
  state: ScenarioState,
  response: ForecastResponse,
): ScenarioState {
  return { ...state, lastResponse: response };
}

/** True exactly when some class value exceeds 1 (training-domain cap). */
export function isExtrapolating(state: ScenarioState): boolean {
  return state.classVector.some((v) => v > 1);
}

export function saveScenario(
  store: readonly SavedScenario[],
  name: string,
  state: ScenarioState,
): SavedScenario[] {
  if (!name.trim()) throw new Error("scenario name must not be empty");
  if (store.some((s) => s.name === name)) {
    throw new Error(`scenario ${JSON.stringify(name)} already exists and is immutable`);
  }
  const snapshot: ScenarioState = {
    ...state,
    classVector: Object.freeze(state.classVector.slice()),
  };
  return [...store, Object.freeze({ name, state: snapshot })];
}

export function deleteScenario(
  store: readonly SavedScenario[],
  name: string,
): SavedScenario[] {
  const next = store.filter((s) => s.name !== name);
  if (next.length === store.length) {
    throw new Error(`no saved scenario named ${JSON.stringify(name)}`);
  }
  return next;
}

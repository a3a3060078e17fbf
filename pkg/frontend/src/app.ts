/** DOM wiring: route picker, history view, class sliders with half-mode,
 * live range display, extrapolation badge, and scenario comparison. */

import { ApiClient, ForecastResponse } from "./api.js";
import { compareBars, historyChartModel, renderCompareBars, renderHistoryChart } from "./chart.js";
import { formatRange, formatSig } from "./format.js";
import { ForecastRefresher } from "./refresh.js";
import {
  CLASS_MAX,
  SavedScenario,
  ScenarioState,
  deleteScenario,
  editClass,
  isExtrapolating,
  newScenario,
  saveScenario,
  setHalf,
  withResponse,
} from "./scenario.js";

export class App {
  private state: ScenarioState | null = null;
  private saved: readonly SavedScenario[] = [];
  private halfMode = false;
  private readonly refresher: ForecastRefresher;

  constructor(
    private readonly doc: Document,
    private readonly api: ApiClient,
    private readonly scenarioSeed = 20_250_101,
  ) {
    this.refresher = new ForecastRefresher(
      api,
      (state, response) => this.onForecast(state, response),
      (err) => this.showError(err),
    );
  }

  private el<T extends HTMLElement>(id: string): T {
    const found = this.doc.getElementById(id);
    if (!found) throw new Error(`missing element #${id}`);
    return found as T;
  }

  async init(): Promise<void> {
    try {
      const [routes, models] = await Promise.all([
        this.api.getRoutes(),
        this.api.getModels(),
      ]);
      const select = this.el<HTMLSelectElement>("route-select");
      select.textContent = "";
      for (const model of models) {
        const info = routes.find((r) => r.route === model.route);
        const option = this.doc.createElement("option");
        option.value = model.route;
        option.textContent = info
          ? `${model.route} (${info.start}..${info.end})`
          : model.route;
        select.appendChild(option);
      }
      select.addEventListener("change", () => void this.selectRoute(select.value));
      this.el<HTMLInputElement>("half-mode").addEventListener("change", (ev) => {
        this.halfMode = (ev.target as HTMLInputElement).checked;
      });
      this.el<HTMLButtonElement>("save-scenario").addEventListener("click", () =>
        this.onSave(),
      );
      if (models.length > 0) await this.selectRoute(models[0].route);
    } catch (err) {
      this.showError(err);
    }
  }

  private async selectRoute(route: string): Promise<void> {
    try {
      const history = await this.api.getHistory(route);
      renderHistoryChart(this.el("history-chart"), historyChartModel(history));
      this.state = newScenario(route, 12, this.scenarioSeed);
      this.renderSliders();
      this.renderBadge();
      await this.refresher.flush(this.state);
      this.clearError();
    } catch (err) {
      this.showError(err);
    }
  }

  private renderSliders(): void {
    const state = this.state;
    if (!state) return;
    const host = this.el("sliders");
    host.textContent = "";
    state.classVector.forEach((value, index) => {
      const wrap = this.doc.createElement("label");
      wrap.className = "slider";
      const slider = this.doc.createElement("input");
      slider.type = "range";
      slider.min = "0";
      slider.max = String(CLASS_MAX);
      slider.step = "0.1";
      slider.value = String(value);
      slider.addEventListener("input", () =>
        this.onEdit(index, Number(slider.value)),
      );
      const caption = this.doc.createElement("span");
      caption.textContent = `m${index + 1}: ${formatSig(value)}`;
      wrap.append(slider, caption);
      host.appendChild(wrap);
    });
  }

  onEdit(monthIndex: number, value: number): void {
    if (!this.state) return;
    try {
      this.state = this.halfMode
        ? setHalf(this.state, monthIndex < 6 ? 0 : 1, value)
        : editClass(this.state, monthIndex, value);
      this.renderSliders();
      this.renderBadge();
      this.refresher.schedule(this.state);
      this.clearError();
    } catch (err) {
      this.showError(err);
    }
  }

  private onForecast(state: ScenarioState, response: ForecastResponse): void {
    if (!this.state || state.route !== this.state.route) return;
    this.state = withResponse(this.state, response);
    // displayed range is the payload value, formatted only for display
    this.el("range-display").textContent = formatRange(response.low, response.high);
    const tbody = this.el("per-month");
    tbody.textContent = "";
    for (const m of response.per_month) {
      const tr = this.doc.createElement("tr");
      for (const cell of [
        m.month, formatSig(m.min), formatSig(m.q10), formatSig(m.median),
        formatSig(m.q90), formatSig(m.max),
      ]) {
        const td = this.doc.createElement("td");
        td.textContent = String(cell);
        tr.appendChild(td);
      }
      tbody.appendChild(tr);
    }
  }

  private renderBadge(): void {
    const badge = this.el("extrapolation-badge");
    const show = this.state !== null && isExtrapolating(this.state);
    badge.hidden = !show;
    badge.textContent = show ? "extrapolating beyond training domain" : "";
  }

  private onSave(): void {
    if (!this.state) return;
    const name = this.el<HTMLInputElement>("scenario-name").value;
    try {
      this.saved = saveScenario(this.saved, name, this.state);
      this.renderSaved();
      this.clearError();
    } catch (err) {
      this.showError(err);
    }
  }

  onDelete(name: string): void {
    try {
      this.saved = deleteScenario(this.saved, name);
      this.renderSaved();
    } catch (err) {
      this.showError(err);
    }
  }

  private renderSaved(): void {
    const list = this.el("scenario-list");
    list.textContent = "";
    for (const s of this.saved) {
      const li = this.doc.createElement("li");
      const label = s.state.lastResponse
        ? `${s.name} ${formatRange(s.state.lastResponse.low, s.state.lastResponse.high)}`
        : s.name;
      li.textContent = label + " ";
      const del = this.doc.createElement("button");
      del.textContent = "x";
      del.addEventListener("click", () => this.onDelete(s.name));
      li.appendChild(del);
      list.appendChild(li);
    }
    renderCompareBars(this.el("compare"), compareBars(this.saved));
  }

  private showError(err: unknown): void {
    this.el("error-box").textContent = err instanceof Error ? err.message : String(err);
  }

  private clearError(): void {
    this.el("error-box").textContent = "";
  }
}

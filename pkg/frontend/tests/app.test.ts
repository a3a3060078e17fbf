// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import fixture from "./fixtures/console_fixture.json";
import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import { formatRange } from "../src/format.js";

const PAGE = `
  <select id="route-select"></select>
  <input type="checkbox" id="half-mode">
  <span id="error-box"></span>
  <div id="history-chart"></div>
  <div id="sliders"></div>
  <span id="range-display"></span>
  <span id="extrapolation-badge" hidden></span>
  <table><tbody id="per-month"></tbody></table>
  <input id="scenario-name">
  <button id="save-scenario"></button>
  <ul id="scenario-list"></ul>
  <div id="compare"></div>
`;

const initialResponse = fixture.steps[0].response;

function stubApi(overrides: Record<string, unknown> = {}): ApiClient {
  return new ApiClient("", async (url, init) => {
    const respond = (body: unknown, status = 200) =>
      new Response(JSON.stringify(body), { status });
    if (url.endsWith("/api/routes")) {
      return respond([
        { route: "ALPHA", start: "2018-01", end: "2023-04", months: 64 },
      ]);
    }
    if (url.endsWith("/api/models")) {
      return respond([initialResponse.model]);
    }
    if (url.includes("/history")) {
      if (overrides.historyError) {
        return respond({ code: "unknown_route", message: "no data" }, 404);
      }
      return respond(fixture.history);
    }
    if (url.endsWith("/api/forecast")) {
      const body = JSON.parse(String(init?.body));
      const match = fixture.steps.find(
        (s) => JSON.stringify(s.class_vector) === JSON.stringify(body.class_vector),
      );
      return respond(match ? match.response : initialResponse);
    }
    throw new Error(`unexpected ${url}`);
  });
}

async function settle(): Promise<void> {
  for (let i = 0; i < 10; i++) await Promise.resolve();
}

describe("App wiring", () => {
  beforeEach(() => {
    document.body.innerHTML = PAGE;
  });

  it("populates routes, renders history and the initial forecast", async () => {
    const app = new App(document, stubApi(), 777);
    await app.init();
    await settle();
    const select = document.getElementById("route-select") as HTMLSelectElement;
    expect(select.options.length).toBe(1);
    expect(select.options[0].value).toBe("ALPHA");
    expect(document.querySelectorAll("#history-chart circle").length).toBe(
      fixture.history.values.length,
    );
    expect(document.querySelectorAll("#sliders input").length).toBe(12);
    expect(document.getElementById("range-display")!.textContent).toBe(
      formatRange(initialResponse.low, initialResponse.high),
    );
  });

  it("shows the extrapolation badge exactly while a class exceeds 1", async () => {
    const app = new App(document, stubApi(), 777);
    await app.init();
    await settle();
    const badge = document.getElementById("extrapolation-badge") as HTMLElement;
    expect(badge.hidden).toBe(true);
    app.onEdit(6, 1.2);
    expect(badge.hidden).toBe(false);
    expect(badge.textContent).toMatch(/extrapolating beyond training domain/);
    app.onEdit(6, 1.0);
    expect(badge.hidden).toBe(true);
  });

  it("surfaces service errors inline without a chart", async () => {
    const app = new App(document, stubApi({ historyError: true }), 777);
    await app.init();
    await settle();
    expect(document.getElementById("error-box")!.textContent).toMatch(/no data/);
    expect(document.querySelectorAll("#history-chart svg").length).toBe(0);
  });

  it("rejects out-of-range slider values with a message", async () => {
    const app = new App(document, stubApi(), 777);
    await app.init();
    await settle();
    app.onEdit(0, 2.0);
    expect(document.getElementById("error-box")!.textContent).toMatch(/class value/);
  });

  it("saving and deleting scenarios updates the compare bars", async () => {
    const app = new App(document, stubApi(), 777);
    await app.init();
    await settle();
    (document.getElementById("scenario-name") as HTMLInputElement).value = "base";
    (document.getElementById("save-scenario") as HTMLButtonElement).click();
    expect(document.querySelectorAll("#compare rect[data-bar]").length).toBe(1);
    (document.getElementById("scenario-name") as HTMLInputElement).value = "other";
    (document.getElementById("save-scenario") as HTMLButtonElement).click();
    expect(document.querySelectorAll("#compare rect[data-bar]").length).toBe(2);
    app.onDelete("base");
    const bars = document.querySelectorAll("#compare rect[data-bar]");
    expect(bars.length).toBe(1);
    expect(bars[0].getAttribute("data-bar")).toBe("other");
  });
});

/** Typed client for the forecasting service. The console never computes
 * forecasts locally; every number it shows comes from these payloads. */

export interface RouteInfo {
  route: string;
  start: string;
  end: string;
  months: number;
}

export interface HistoryPayload {
  route: string;
  start: string;
  values: number[];
  classes: number[];
  monthly_s: number[];
}

export interface ModelInfo {
  route: string;
  training_cutoff: string;
  layer_sizes: number[];
  hidden_activation: string;
  seed: number;
  schema_version: number;
}

export interface MonthSummary {
  month: string;
  min: number;
  q10: number;
  median: number;
  q90: number;
  max: number;
  retained: number;
}

export interface ForecastResponse {
  schema_version: number;
  route: string;
  start: string;
  months: number;
  low: number;
  high: number;
  per_month: MonthSummary[];
  model: ModelInfo;
  seed_used: number;
}

export interface ForecastRequest {
  route: string;
  class_vector: number[];
  months: number;
  seed?: number;
  start?: { year: number; month: number };
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(resp: Response): Promise<ApiError> {
  try {
    const body = (await resp.json()) as { code?: string; message?: string };
    return new ApiError(resp.status, body.code ?? "error", body.message ?? resp.statusText);
  } catch {
    return new ApiError(resp.status, "error", resp.statusText);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  getRoutes(): Promise<RouteInfo[]> {
    return this.get("/api/routes");
  }

  getHistory(route: string): Promise<HistoryPayload> {
    return this.get(`/api/routes/${encodeURIComponent(route)}/history`);
  }

  getModels(): Promise<ModelInfo[]> {
    return this.get("/api/models");
  }

  async postForecast(req: ForecastRequest, signal?: AbortSignal): Promise<ForecastResponse> {
    const resp = await this.fetchFn(this.baseUrl + "/api/forecast", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
      signal,
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as ForecastResponse;
  }
}

/**
 * Typed client for the classification service's /v1 endpoints.
 *
 * The console performs no other I/O: every class string it ever shows
 * originated in one of these responses.
 */

export interface Candidate {
  class: string;
  confidence: number;
  example_query: string;
}

export interface ClassifyResponse {
  status: "answered" | "ambiguous" | "rejected";
  class: string | null;
  confidence: number;
  candidates: Candidate[];
  unknown_count: number;
  query_id: string;
}

export interface ModelInfo {
  classes: number;
  vocabulary: number;
  alpha: number;
  threshold: number;
  window: number;
  format: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

/** What the console needs from the backend; ApiClient is the real one. */
export interface Api {
  modelInfo(): Promise<ModelInfo>;
  classify(text: string): Promise<ClassifyResponse>;
  feedback(queryId: string, chosenClass: string): Promise<void>;
}

export class ApiClient implements Api {
  constructor(readonly baseUrl: string = "") {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, `${path} failed with HTTP ${response.status}`);
    }
    return response;
  }

  async modelInfo(): Promise<ModelInfo> {
    const response = await this.request("/v1/model");
    return (await response.json()) as ModelInfo;
  }

  async classify(text: string): Promise<ClassifyResponse> {
    const response = await this.request("/v1/classify", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
    return (await response.json()) as ClassifyResponse;
  }

  async feedback(queryId: string, chosenClass: string): Promise<void> {
    await this.request("/v1/feedback", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ query_id: queryId, chosen_class: chosenClass }),
    });
  }
}

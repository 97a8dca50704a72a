import type { ApplicantRow, LetterView, ReportView } from "./types.js";

// Transport abstraction so every view renders against recorded fixtures
// with the backend absent.

export interface TransportResponse {
  status: number;
  body: string;
}

export type Transport = (path: string) => Promise<TransportResponse>;

export function fetchTransport(baseUrl: string): Transport {
  return async (path: string) => {
    const response = await fetch(baseUrl + path);
    return { status: response.status, body: await response.text() };
  };
}

export function fixtureTransport(table: Record<string, string>): Transport {
  return async (path: string) => {
    const body = table[path];
    if (body === undefined) {
      return { status: 404, body: JSON.stringify({ error: `no fixture for ${path}` }) };
    }
    return { status: 200, body };
  };
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(private transport: Transport) {}

  private async getJson<T>(path: string): Promise<T> {
    let response: TransportResponse;
    try {
      response = await this.transport(path);
    } catch (err) {
      throw new ApiError(0, `network failure fetching ${path}: ${String(err)}`);
    }
    if (response.status !== 200) {
      throw new ApiError(response.status, `GET ${path} -> ${response.status}`);
    }
    return JSON.parse(response.body) as T;
  }

  getReport(applicantId: string): Promise<ReportView> {
    return this.getJson<ReportView>(`/applicants/${encodeURIComponent(applicantId)}/report`);
  }

  getLetter(letterId: string): Promise<LetterView> {
    return this.getJson<LetterView>(`/letters/${encodeURIComponent(letterId)}`);
  }

  getApplicants(): Promise<ApplicantRow[]> {
    return this.getJson<ApplicantRow[]>("/applicants");
  }
}

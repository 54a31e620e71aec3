// Thin typed client over the server's JSON endpoints. Configuration is
// the base URL plus an optional bearer token; nothing else.

import type {
  AggregateRow,
  ApplicationRow,
  ClassifyForm,
  KbEntryDoc,
  ServiceHostsDoc,
  SystemDoc,
  TriageDoc,
} from './types.js';

export interface ApiConfig {
  baseUrl: string;
  token?: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function errorDetail(res: Response): Promise<string> {
  try {
    const body = await res.json();
    if (body && typeof body.error === 'string') return body.error;
    return JSON.stringify(body);
  } catch {
    return res.statusText || 'request failed';
  }
}

export class ApiClient {
  constructor(private cfg: ApiConfig) {}

  private headers(json = false): Record<string, string> {
    const h: Record<string, string> = {};
    if (json) h['Content-Type'] = 'application/json';
    if (this.cfg.token) h['Authorization'] = `Bearer ${this.cfg.token}`;
    return h;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await fetch(this.cfg.baseUrl + path, init);
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return (await res.json()) as T;
  }

  private get<T>(path: string): Promise<T> {
    return this.request<T>(path, { headers: this.headers() });
  }

  triage(includeKnown: boolean): Promise<TriageDoc> {
    return this.get(`/reports/triage?include_known=${includeKnown}`);
  }

  aggregate(): Promise<AggregateRow[]> {
    return this.get('/reports/aggregate');
  }

  applications(): Promise<ApplicationRow[]> {
    return this.get('/reports/apps');
  }

  system(): Promise<SystemDoc> {
    return this.get('/reports/system');
  }

  hosts(): Promise<string[]> {
    return this.get('/hosts');
  }

  serviceHosts(key: string): Promise<ServiceHostsDoc> {
    return this.get(`/services/${encodeURIComponent(key)}/hosts`);
  }

  classify(form: ClassifyForm): Promise<KbEntryDoc> {
    return this.request('/kb/classify', {
      method: 'POST',
      headers: this.headers(true),
      body: JSON.stringify(form),
    });
  }
}

import type {
  AcquireResponse,
  ApiErrorBody,
  ModelMeta,
  SessionCreated,
  SessionState,
  SuggestionResponse,
} from './types.js';

export class ApiRequestError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiRequestError';
  }
}

async function parseError(response: Response): Promise<never> {
  let code = 'unknown';
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as ApiErrorBody;
    if (body.error) {
      code = body.error.code;
      message = body.error.message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiRequestError(response.status, code, message);
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) await parseError(response);
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(private baseUrl: string = '') {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async health(): Promise<{ status: string; sessions: number }> {
    return asJson(await fetch(this.url('/v1/health')));
  }

  async model(): Promise<ModelMeta> {
    return asJson(await fetch(this.url('/v1/model')));
  }

  async createSession(
    initial: Record<string, number> = {},
  ): Promise<SessionCreated> {
    return asJson(
      await fetch(this.url('/v1/sessions'), {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ initial }),
      }),
    );
  }

  async getState(sessionId: string): Promise<SessionState> {
    return asJson(await fetch(this.url(`/v1/sessions/${sessionId}`)));
  }

  async getSuggestion(sessionId: string): Promise<SuggestionResponse> {
    return asJson(
      await fetch(this.url(`/v1/sessions/${sessionId}/suggestion`)),
    );
  }

  /** Acquire a single ungrouped feature by raw (unnormalized) value. */
  async acquireFeature(
    sessionId: string,
    id: string,
    value: number,
  ): Promise<AcquireResponse> {
    return this.post(sessionId, { id, value });
  }

  /** Acquire a whole group; `values` maps member feature names to raw values. */
  async acquireGroup(
    sessionId: string,
    group: string,
    values: Record<string, number>,
  ): Promise<AcquireResponse> {
    return this.post(sessionId, { group, values });
  }

  private async post(
    sessionId: string,
    body: object,
  ): Promise<AcquireResponse> {
    return asJson(
      await fetch(this.url(`/v1/sessions/${sessionId}/features`), {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(body),
      }),
    );
  }

  async deleteSession(sessionId: string): Promise<void> {
    const r = await fetch(this.url(`/v1/sessions/${sessionId}`), {
      method: 'DELETE',
    });
    if (!r.ok) await parseError(r);
  }
}

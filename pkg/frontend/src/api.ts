// Typed client for the pipeline service. All analysis numbers displayed by
// the UI come out of these calls; nothing is computed client-side.

import type { PipelineConfigJson, ReportJson, StageName } from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class StageFailure extends Error {
  constructor(
    public readonly stage: string | null,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async createSession(pgmBytes: ArrayBuffer | Uint8Array): Promise<string> {
    const body = pgmBytes instanceof Uint8Array ? pgmBytes : new Uint8Array(pgmBytes);
    const res = await this.fetchFn(`${this.baseUrl}/sessions`, {
      method: 'POST',
      body: body as unknown as BodyInit,
    });
    if (res.status !== 201) throw new Error(`upload failed: ${await describe(res)}`);
    const data = (await res.json()) as { session_id: string };
    return data.session_id;
  }

  async run(sessionId: string, config: PipelineConfigJson): Promise<ReportJson> {
    const res = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/run`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(config),
    });
    if (res.status === 422) {
      const data = (await res.json()) as { detail: { stage?: string; reason?: string } };
      throw new StageFailure(data.detail.stage ?? null, data.detail.reason ?? 'stage failure');
    }
    if (!res.ok) throw new Error(`run failed: ${await describe(res)}`);
    return (await res.json()) as ReportJson;
  }

  async getReport(sessionId: string): Promise<ReportJson> {
    const res = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/report`);
    if (!res.ok) throw new Error(`report unavailable: ${await describe(res)}`);
    return (await res.json()) as ReportJson;
  }

  /** Raw PGM/PPM bytes of a stage artifact. `cacheBust` forces a refetch
   * after a re-run, since the URL itself does not change. */
  async getStage(sessionId: string, name: StageName, cacheBust?: number): Promise<ArrayBuffer> {
    const suffix = cacheBust === undefined ? '' : `?v=${cacheBust}`;
    const res = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/stages/${name}${suffix}`);
    if (!res.ok) throw new Error(`stage ${name} unavailable: ${await describe(res)}`);
    return res.arrayBuffer();
  }

  stageUrl(sessionId: string, name: StageName, cacheBust: number): string {
    return `${this.baseUrl}/sessions/${sessionId}/stages/${name}?v=${cacheBust}`;
  }

  async deleteSession(sessionId: string): Promise<void> {
    await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}`, { method: 'DELETE' });
  }
}

async function describe(res: Response): Promise<string> {
  try {
    const data = (await res.json()) as { detail?: unknown };
    return `${res.status} ${JSON.stringify(data.detail ?? data)}`;
  } catch {
    return String(res.status);
  }
}

// Session view-model: one uploaded image, the editable config, the latest
// service report, and the run state machine. At most one run is in flight;
// the run button stays disabled while `status.kind === 'running'`.

import { ApiClient, StageFailure } from './api.js';
import type { PipelineConfigJson, ReportJson, RunStatus } from './types.js';
import { STAGE_NAMES } from './types.js';
import { defaultConfig } from './config.js';

export interface StageRefresh {
  name: (typeof STAGE_NAMES)[number];
  bytes: ArrayBuffer;
}

export class SessionView {
  sessionId: string | null = null;
  config: PipelineConfigJson = defaultConfig();
  report: ReportJson | null = null;
  status: RunStatus = { kind: 'idle' };
  runCounter = 0;
  imageWidth = 0;
  imageHeight = 0;

  constructor(private readonly api: ApiClient) {}

  get running(): boolean {
    return this.status.kind === 'running';
  }

  /** White/red counts banner text; every number is service-reported. */
  get countsBanner(): string {
    if (!this.report) return 'no run yet';
    return (
      `white: ${this.report.white_count}   red: ${this.report.red_count}   ` +
      `fake regions rejected: ${this.report.rejected_fake_regions}`
    );
  }

  async upload(pgmBytes: ArrayBuffer, width: number, height: number): Promise<void> {
    this.sessionId = await this.api.createSession(pgmBytes);
    this.imageWidth = width;
    this.imageHeight = height;
    this.report = null;
    this.status = { kind: 'idle' };
  }

  /** Guard evaluated client-side before a run is attempted. */
  blockedReason(): string | null {
    if (!this.sessionId) return 'upload an image first';
    if (this.config.templates.length === 0) return 'draw at least one template rectangle';
    if (this.running) return 'a run is already in progress';
    return null;
  }

  /** POST the current config, then refresh thumbnails and the banner.
   * Returns the refreshed stage bytes so the caller can repaint. */
  async runAndRefresh(): Promise<StageRefresh[]> {
    const blocked = this.blockedReason();
    if (blocked) throw new Error(blocked);
    this.status = { kind: 'running' };
    try {
      this.report = await this.api.run(this.sessionId!, this.config);
      this.runCounter += 1; // cache-busts stage URLs
      const stages: StageRefresh[] = [];
      for (const name of STAGE_NAMES) {
        stages.push({ name, bytes: await this.api.getStage(this.sessionId!, name, this.runCounter) });
      }
      this.status = { kind: 'done' };
      return stages;
    } catch (err) {
      if (err instanceof StageFailure) {
        this.status = { kind: 'error', stage: err.stage, message: err.message };
      } else {
        this.status = { kind: 'error', stage: null, message: (err as Error).message };
      }
      throw err;
    }
  }

  /** Serialized UI state; reloading it reproduces identical values. */
  snapshot(): string {
    return JSON.stringify({ config: this.config });
  }

  restore(snapshot: string): void {
    const data = JSON.parse(snapshot) as { config: PipelineConfigJson };
    this.config = data.config;
  }
}

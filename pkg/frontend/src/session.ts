/**
 * Session flow state machine, DOM-free so tests can drive it directly.
 *
 * The open session is persisted to storage after every change, so a reload
 * resumes mid-session instead of requesting a new one. Completed sessions
 * are cleared; only an unfinished session is worth resuming.
 */

import { ApiError, requestSession, submitAnnotation } from './api.js';
import type { SessionImage } from './api.js';
import type { SliderScores } from './normalize.js';

const SESSION_KEY = 'annotate-ui.session';
const ANNOTATOR_KEY = 'annotate-ui.annotator';

export type FlowState =
  | 'idle'
  | 'annotating'
  | 'session-complete'
  | 'pool-exhausted'
  | 'error';

export interface FlowSnapshot {
  state: FlowState;
  sessionId: string | null;
  image: SessionImage | null;
  /** Zero-based position of the current image within the session. */
  index: number;
  total: number;
  message: string;
}

interface StoredSession {
  sessionId: string;
  annotatorId: string;
  images: SessionImage[];
  submitted: string[];
}

export function getOrCreateAnnotatorId(storage: Storage): string {
  const existing = storage.getItem(ANNOTATOR_KEY);
  if (existing) {
    return existing;
  }
  const fresh = `web-${Math.random().toString(16).slice(2, 10)}`;
  storage.setItem(ANNOTATOR_KEY, fresh);
  return fresh;
}

function loadStored(storage: Storage, annotatorId: string): StoredSession | null {
  const raw = storage.getItem(SESSION_KEY);
  if (!raw) {
    return null;
  }
  try {
    const parsed = JSON.parse(raw) as StoredSession;
    if (
      typeof parsed.sessionId !== 'string' ||
      parsed.annotatorId !== annotatorId ||
      !Array.isArray(parsed.images) ||
      !Array.isArray(parsed.submitted)
    ) {
      return null;
    }
    return parsed;
  } catch {
    return null;
  }
}

export class SessionFlow {
  private readonly baseUrl: string;
  private readonly annotatorId: string;
  private readonly storage: Storage;
  private state: FlowState = 'idle';
  private sessionId: string | null = null;
  private images: SessionImage[] = [];
  private submitted = new Set<string>();
  private message = '';

  constructor(baseUrl: string, annotatorId: string, storage: Storage) {
    this.baseUrl = baseUrl;
    this.annotatorId = annotatorId;
    this.storage = storage;
  }

  snapshot(): FlowSnapshot {
    return {
      state: this.state,
      sessionId: this.sessionId,
      image: this.currentImage(),
      index: this.submitted.size,
      total: this.images.length,
      message: this.message,
    };
  }

  private currentImage(): SessionImage | null {
    // a failed submit leaves the flow in 'error' with the image still
    // pending, so a retry targets the same image
    if (this.state !== 'annotating' && this.state !== 'error') {
      return null;
    }
    if (this.sessionId === null) {
      return null;
    }
    return this.images.find((img) => !this.submitted.has(img.id)) ?? null;
  }

  private persist(): void {
    const stored: StoredSession = {
      sessionId: this.sessionId as string,
      annotatorId: this.annotatorId,
      images: this.images,
      submitted: [...this.submitted],
    };
    this.storage.setItem(SESSION_KEY, JSON.stringify(stored));
  }

  /** Resume the stored session if one is open, otherwise request a new one. */
  async start(): Promise<FlowSnapshot> {
    const stored = loadStored(this.storage, this.annotatorId);
    if (stored && stored.submitted.length < stored.images.length) {
      this.sessionId = stored.sessionId;
      this.images = stored.images;
      this.submitted = new Set(stored.submitted);
      this.state = 'annotating';
      this.message = '';
      return this.snapshot();
    }
    return this.requestNew();
  }

  /** Drop any stored session and ask the service for a fresh one. */
  async nextSession(): Promise<FlowSnapshot> {
    this.storage.removeItem(SESSION_KEY);
    return this.requestNew();
  }

  private async requestNew(): Promise<FlowSnapshot> {
    try {
      const session = await requestSession(this.baseUrl, this.annotatorId);
      this.sessionId = session.session_id;
      this.images = session.images;
      this.submitted = new Set();
      this.state = 'annotating';
      this.message = '';
      this.persist();
    } catch (err) {
      if (err instanceof ApiError && err.status === 'pool-exhausted') {
        this.state = 'pool-exhausted';
        this.message =
          'No images left for you to annotate. Thank you for taking part.';
      } else {
        this.state = 'error';
        this.message = `Could not reach the service. ${String(
          err instanceof Error ? err.message : err,
        )} Press submit to retry.`;
      }
    }
    return this.snapshot();
  }

  /**
   * Submit scores for the current image. Returns the server's normalized
   * distribution on success, null when nothing was pending. Slider values
   * stay untouched in the caller on failure so a retry loses nothing.
   */
  async submitCurrent(scores: SliderScores): Promise<number[] | null> {
    if (this.state === 'error' && this.sessionId === null) {
      // the initial session request failed; retry it instead
      await this.requestNew();
      return null;
    }
    const image = this.currentImage();
    if (image === null || this.sessionId === null) {
      return null;
    }
    try {
      const response = await submitAnnotation(
        this.baseUrl,
        this.sessionId,
        image.id,
        scores,
      );
      this.advance(image.id);
      return response.normalized;
    } catch (err) {
      if (err instanceof ApiError && err.httpStatus === 409) {
        // duplicate or cap reached: this image is spoken for, move on
        this.message = `Image ${image.id} was already covered, skipping.`;
        this.advance(image.id);
        return null;
      }
      if (err instanceof ApiError && err.status === 'unknown-session') {
        this.storage.removeItem(SESSION_KEY);
        this.state = 'error';
        this.message = 'The session expired. Press next session to continue.';
        return null;
      }
      this.state = 'error';
      this.message = `Submission failed. ${String(
        err instanceof Error ? err.message : err,
      )} Your sliders are unchanged, press submit to retry.`;
      return null;
    }
  }

  private advance(imageId: string): void {
    this.submitted.add(imageId);
    this.state = 'annotating';
    if (this.submitted.size >= this.images.length) {
      this.state = 'session-complete';
      this.message = 'Session complete. Take another whenever you like.';
      this.storage.removeItem(SESSION_KEY);
    } else {
      this.persist();
    }
  }
}

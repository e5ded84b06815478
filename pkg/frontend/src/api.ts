/**
 * Typed fetch wrappers over the annotation service's JSON API.
 *
 * Error responses carry a machine-readable status string, surfaced here as
 * ApiError.status so callers can branch without parsing prose.
 */

import type { SliderScores } from './normalize.js';

export interface SessionImage {
  id: string;
  url: string;
}

export interface SessionResponse {
  session_id: string;
  images: SessionImage[];
}

export interface AnnotationResponse {
  status: 'ok';
  classes: string[];
  normalized: number[];
}

export class ApiError extends Error {
  /** HTTP status code of the rejected request. */
  readonly httpStatus: number;
  /** Machine-readable rejection kind, e.g. "pool-exhausted". */
  readonly status: string;

  constructor(httpStatus: number, status: string, detail: string) {
    super(detail || status);
    this.httpStatus = httpStatus;
    this.status = status;
  }
}

async function postJson<T>(url: string, body: unknown): Promise<T> {
  const response = await fetch(url, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(body),
  });
  if (!response.ok) {
    let status = `http-${response.status}`;
    let detail = '';
    try {
      const payload = (await response.json()) as {
        status?: string;
        detail?: string;
      };
      if (payload.status) status = payload.status;
      if (payload.detail) detail = payload.detail;
    } catch {
      // non-JSON error body, keep the generic status
    }
    throw new ApiError(response.status, status, detail);
  }
  return (await response.json()) as T;
}

export function requestSession(
  baseUrl: string,
  annotatorId: string,
): Promise<SessionResponse> {
  return postJson<SessionResponse>(`${baseUrl}/session`, {
    annotator_id: annotatorId,
  });
}

export function submitAnnotation(
  baseUrl: string,
  sessionId: string,
  imageId: string,
  scores: SliderScores,
): Promise<AnnotationResponse> {
  return postJson<AnnotationResponse>(`${baseUrl}/annotation`, {
    session_id: sessionId,
    image_id: imageId,
    scores,
  });
}

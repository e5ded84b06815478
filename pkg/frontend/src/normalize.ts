/**
 * Client-side mirror of the service's slider normalization.
 *
 * The server result is authoritative; this exists so the preview can track
 * the sliders live. The arithmetic matches the server case for case: a
 * slider sum of at least one divides through (neutral 0), a smaller sum is
 * kept verbatim with neutral absorbing the remainder.
 */

export const SLIDER_EMOTIONS = [
  'happy',
  'sad',
  'surprised',
  'fearful',
  'disgusted',
  'angry',
  'contempt',
] as const;

export type SliderEmotion = (typeof SLIDER_EMOTIONS)[number];

export const CLASSES = ['neutral', ...SLIDER_EMOTIONS] as const;

export type SliderScores = Record<SliderEmotion, number>;

export function emptyScores(): SliderScores {
  const out = {} as SliderScores;
  for (const emotion of SLIDER_EMOTIONS) {
    out[emotion] = 0;
  }
  return out;
}

/** Clamp a raw slider reading into [0, 1]; anything non-finite becomes 0. */
export function clampScore(value: number): number {
  if (!Number.isFinite(value)) {
    return 0;
  }
  return Math.min(1, Math.max(0, value));
}

/**
 * Seven slider values to eight displayed probabilities, neutral first.
 * Matches the classes array the server returns with every annotation.
 */
export function normalizeAnnotation(scores: SliderScores): number[] {
  let total = 0;
  for (const emotion of SLIDER_EMOTIONS) {
    total += clampScore(scores[emotion]);
  }
  const out: number[] = new Array(CLASSES.length);
  if (total >= 1) {
    out[0] = 0;
    SLIDER_EMOTIONS.forEach((emotion, i) => {
      out[i + 1] = clampScore(scores[emotion]) / total;
    });
  } else {
    out[0] = 1 - total;
    SLIDER_EMOTIONS.forEach((emotion, i) => {
      out[i + 1] = clampScore(scores[emotion]);
    });
  }
  return out;
}

/**
 * DOM wiring: sliders, live preview bars, session navigation.
 *
 * createApp builds everything under a root element and returns handles the
 * tests drive; the bootstrap at the bottom runs only on a real page with an
 * #app element present at load.
 */

import {
  CLASSES,
  SLIDER_EMOTIONS,
  clampScore,
  emptyScores,
  normalizeAnnotation,
} from './normalize.js';
import type { SliderScores } from './normalize.js';
import { SessionFlow, getOrCreateAnnotatorId } from './session.js';
import type { FlowSnapshot } from './session.js';

export interface AppHandles {
  flow: SessionFlow;
  /** Current slider values as read from the inputs. */
  readScores(): SliderScores;
  /** Await the in-flight render cycle after a click. */
  idle(): Promise<void>;
  root: HTMLElement;
}

const INSTRUCTIONS =
  'Move each slider to indicate how much each basic emotion is perceived ' +
  'in the image, from 0 (the emotion is not perceived at all) to 1. ' +
  'Leaving every slider at 0 marks the image as neutral.';

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function createApp(
  doc: Document,
  root: HTMLElement,
  baseUrl: string,
  storage: Storage,
  annotatorId?: string,
): AppHandles {
  const annotator = annotatorId ?? getOrCreateAnnotatorId(storage);
  const flow = new SessionFlow(baseUrl, annotator, storage);
  let pending: Promise<unknown> = Promise.resolve();

  root.textContent = '';
  const intro = el(doc, 'p', 'instructions', INSTRUCTIONS);
  const progress = el(doc, 'p', 'progress');
  const image = el(doc, 'img', 'current-image');
  image.id = 'current-image';
  const status = el(doc, 'p', 'status');
  status.id = 'status';

  const sliderBox = el(doc, 'div', 'sliders');
  const sliderInputs = new Map<string, HTMLInputElement>();
  const sliderReadouts = new Map<string, HTMLElement>();
  for (const emotion of SLIDER_EMOTIONS) {
    const row = el(doc, 'div', 'slider-row');
    const label = el(doc, 'label', 'slider-label', emotion);
    label.htmlFor = `slider-${emotion}`;
    const input = el(doc, 'input');
    input.type = 'range';
    input.id = `slider-${emotion}`;
    input.min = '0';
    input.max = '1';
    input.step = '0.01';
    input.value = '0';
    const readout = el(doc, 'span', 'slider-value', '0.00');
    row.append(label, input, readout);
    sliderBox.append(row);
    sliderInputs.set(emotion, input);
    sliderReadouts.set(emotion, readout);
  }

  const preview = el(doc, 'div', 'preview');
  const bars = new Map<string, HTMLElement>();
  const barReadouts = new Map<string, HTMLElement>();
  for (const cls of CLASSES) {
    const row = el(doc, 'div', 'preview-row');
    row.append(el(doc, 'span', 'preview-label', cls));
    const track = el(doc, 'div', 'bar-track');
    const bar = el(doc, 'div', 'bar');
    bar.id = `bar-${cls}`;
    track.append(bar);
    const readout = el(doc, 'span', 'preview-value', '0.00');
    readout.id = `bar-value-${cls}`;
    row.append(track, readout);
    preview.append(row);
    bars.set(cls, bar);
    barReadouts.set(cls, readout);
  }

  const submit = el(doc, 'button', 'submit', 'submit');
  submit.id = 'submit';
  const nextSession = el(doc, 'button', 'next-session', 'next session');
  nextSession.id = 'next-session';
  nextSession.hidden = true;

  root.append(intro, progress, image, sliderBox, preview, status, submit, nextSession);

  function readScores(): SliderScores {
    const scores = emptyScores();
    for (const emotion of SLIDER_EMOTIONS) {
      const input = sliderInputs.get(emotion);
      if (input) {
        scores[emotion] = clampScore(Number(input.value));
      }
    }
    return scores;
  }

  function paintDistribution(probs: number[]): void {
    CLASSES.forEach((cls, i) => {
      const p = probs[i] ?? 0;
      const bar = bars.get(cls);
      if (bar) bar.style.width = `${(p * 100).toFixed(1)}%`;
      const readout = barReadouts.get(cls);
      if (readout) readout.textContent = p.toFixed(2);
    });
  }

  function paintPreview(): void {
    paintDistribution(normalizeAnnotation(readScores()));
    for (const emotion of SLIDER_EMOTIONS) {
      const input = sliderInputs.get(emotion);
      const readout = sliderReadouts.get(emotion);
      if (input && readout) {
        readout.textContent = clampScore(Number(input.value)).toFixed(2);
      }
    }
  }

  function resetSliders(): void {
    for (const emotion of SLIDER_EMOTIONS) {
      const input = sliderInputs.get(emotion);
      if (input) input.value = '0';
    }
    paintPreview();
  }

  function render(snapshot: FlowSnapshot): void {
    status.textContent = snapshot.message;
    switch (snapshot.state) {
      case 'annotating':
      case 'error': {
        const current = snapshot.image;
        if (current) {
          image.src = `${baseUrl}${current.url}`;
          image.alt = current.id;
          progress.textContent = `image ${snapshot.index + 1} of ${snapshot.total}`;
        }
        submit.hidden = false;
        submit.disabled = false;
        nextSession.hidden = snapshot.state !== 'error' || snapshot.image !== null;
        break;
      }
      case 'session-complete':
        progress.textContent = `session done, ${snapshot.total} images annotated`;
        submit.hidden = true;
        nextSession.hidden = false;
        break;
      case 'pool-exhausted':
        progress.textContent = '';
        image.removeAttribute('src');
        submit.hidden = true;
        nextSession.hidden = true;
        break;
      default:
        submit.disabled = true;
    }
  }

  for (const input of sliderInputs.values()) {
    input.addEventListener('input', paintPreview);
  }

  submit.addEventListener('click', () => {
    submit.disabled = true;
    pending = flow
      .submitCurrent(readScores())
      .then((normalized) => {
        if (normalized) {
          // the service's answer replaces the local preview
          paintDistribution(normalized);
          resetSliders();
        }
        render(flow.snapshot());
      })
      .finally(() => {
        submit.disabled = false;
      });
  });

  nextSession.addEventListener('click', () => {
    pending = flow.nextSession().then(() => {
      resetSliders();
      render(flow.snapshot());
    });
  });

  pending = flow.start().then(() => {
    paintPreview();
    render(flow.snapshot());
  });

  return {
    flow,
    readScores,
    idle: async () => {
      await pending;
    },
    root,
  };
}

declare global {
  interface Window {
    annotateUi?: AppHandles;
  }
}

if (typeof document !== 'undefined') {
  const mount = document.getElementById('app');
  if (mount) {
    window.annotateUi = createApp(document, mount, '', window.localStorage);
  }
}

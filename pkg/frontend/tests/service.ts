/**
 * Spawns the real annotation service for end-to-end tests.
 *
 * Requires the Python package to be installed so the `emoblend` entry point
 * is on PATH; each started instance gets its own image pool and data dir.
 */

import { spawn } from 'node:child_process';
import type { ChildProcess } from 'node:child_process';
import { mkdtempSync, rmSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

export interface RunningService {
  baseUrl: string;
  stop(): Promise<void>;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function startService(options: {
  port: number;
  imageCount: number;
  seed?: number;
}): Promise<RunningService> {
  const imageDir = mkdtempSync(join(tmpdir(), 'annotate-ui-images-'));
  const dataDir = mkdtempSync(join(tmpdir(), 'annotate-ui-data-'));
  for (let i = 0; i < options.imageCount; i += 1) {
    writeFileSync(join(imageDir, `face${String(i).padStart(4, '0')}.png`), 'x');
  }
  const args = [
    'serve',
    '--host',
    '127.0.0.1',
    '--port',
    String(options.port),
    '--image-dir',
    imageDir,
    '--data-dir',
    dataDir,
  ];
  if (options.seed !== undefined) {
    args.push('--seed', String(options.seed));
  }
  const child: ChildProcess = spawn('emoblend', args, {
    stdio: ['ignore', 'pipe', 'pipe'],
  });
  // Drain both pipes: the access log goes to stdout, and an unread pipe
  // fills up and blocks the service after a few hundred requests.
  let logs = '';
  child.stdout?.on('data', (chunk: Buffer) => {
    logs += chunk.toString();
  });
  child.stderr?.on('data', (chunk: Buffer) => {
    logs += chunk.toString();
  });

  const baseUrl = `http://127.0.0.1:${options.port}`;
  const deadline = Date.now() + 20_000;
  for (;;) {
    if (child.exitCode !== null) {
      throw new Error(`service exited early (code ${child.exitCode}): ${logs}`);
    }
    try {
      const response = await fetch(`${baseUrl}/report`);
      if (response.ok) {
        break;
      }
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      child.kill('SIGKILL');
      throw new Error(`service never became ready: ${logs}`);
    }
    await sleep(200);
  }

  return {
    baseUrl,
    stop: async () => {
      child.kill('SIGTERM');
      const gone = Date.now() + 5_000;
      while (child.exitCode === null && Date.now() < gone) {
        await sleep(100);
      }
      if (child.exitCode === null) {
        child.kill('SIGKILL');
      }
      rmSync(imageDir, { recursive: true, force: true });
      rmSync(dataDir, { recursive: true, force: true });
    },
  };
}

/** Deterministic 32-bit PRNG so randomized corpora are reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

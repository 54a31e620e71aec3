// @vitest-environment jsdom
//
// Full console flow against a live API server: classify a yellow service
// Known and it leaves the default view; classify another Hostile and it
// re-renders red at the top; drill-down matches the endpoint's answer.

import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { App } from '../src/app.js';
import type { ServiceHostsDoc } from '../src/types.js';

const PORT = 18700 + (process.pid % 1000);
const BASE = `http://127.0.0.1:${PORT}`;

const HEADER =
  'Host\tService\tDisplayName\tStatus\tStartupType\tLogOnAs\tPath\tManufacturer\tDescription';

function exportRow(host: string, service: string, status: string): string {
  return [
    host,
    service,
    service,
    status,
    'Automatic',
    'Local System',
    `C:\\svc\\${service.replace(/ /g, '')}.exe`,
    'Acme',
    `${service} does things`,
  ].join('\t');
}

async function until<T>(probe: () => T | null, what: string, ms = 10000): Promise<T> {
  const deadline = Date.now() + ms;
  for (;;) {
    const got = probe();
    if (got !== null) return got;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 25));
  }
}

let server: ChildProcess;
let dataDir: string;
let startedAt: number;

beforeAll(async () => {
  startedAt = Date.now();
  dataDir = mkdtempSync(join(tmpdir(), 'svcwatch-flow-'));
  server = spawn(
    'python3',
    ['-m', 'svcwatch', '--data-dir', dataDir, 'serve', '--port', String(PORT)],
    { stdio: 'ignore' },
  );
  const deadline = Date.now() + 20000;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/hosts`);
      if (res.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error('API server never came up');
    await new Promise((r) => setTimeout(r, 100));
  }

  const body = [
    HEADER,
    exportRow('hostA', 'Alpha Agent', 'Running'),
    exportRow('hostA', 'Beta Helper', 'Running'),
    exportRow('hostB', 'Alpha Agent', 'Running'),
    exportRow('hostB', 'Beta Helper', 'Stopped'),
    exportRow('hostB', 'Gamma Tool', 'Running'),
    '',
  ].join('\n');
  const res = await fetch(`${BASE}/ingest/export?observed_at=2026-02-01T00:00:00Z`, {
    method: 'POST',
    body,
  });
  expect(res.status).toBe(201);
}, 30000);

afterAll(() => {
  server?.kill('SIGTERM');
  if (dataDir) rmSync(dataDir, { recursive: true, force: true });
});

describe('console against a live server', () => {
  it('classifies yellow services and keeps drill-down honest', async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const root = document.getElementById('app')!;
    const app = new App(new ApiClient({ baseUrl: BASE }), root);
    app.start();

    const rowEls = () => [...root.querySelectorAll('tr.triage-row')] as HTMLElement[];
    const rowKeys = () => rowEls().map((r) => r.dataset.serviceKey);

    // everything starts yellow
    await until(() => (rowEls().length === 3 ? true : null), 'initial triage rows');
    expect(rowKeys()).toEqual(['alpha agent', 'beta helper', 'gamma tool']);
    expect(rowEls().every((r) => r.classList.contains('yellow'))).toBe(true);

    // drill-down matches the endpoint
    rowEls()[0].click();
    const detail = await until(
      () => root.querySelector('.detail-panel'),
      'alpha agent detail panel',
    );
    const direct = (await (
      await fetch(`${BASE}/services/alpha%20agent/hosts`)
    ).json()) as ServiceHostsDoc;
    expect(direct.running).toEqual(['hostA', 'hostB']);
    const shownRunning = [...detail.querySelectorAll('.detail-running li')].map(
      (li) => li.textContent,
    );
    expect(shownRunning).toEqual(direct.running);

    // classify Known: the key disappears from the default view on reload
    const form = await until(
      () => root.querySelector('form.classify-form') as HTMLFormElement | null,
      'classify form',
    );
    (form.querySelector('select') as HTMLSelectElement).value = 'Known';
    form.dispatchEvent(new Event('submit', { cancelable: true }));
    await until(
      () => (!rowKeys().includes('alpha agent') && rowEls().length === 2 ? true : null),
      'alpha agent to leave the view',
    );

    // classify Hostile: the key re-renders red, ahead of the yellows
    const beta = rowEls().find((r) => r.dataset.serviceKey === 'beta helper')!;
    beta.click();
    const form2 = await until(
      () => root.querySelector('form.classify-form') as HTMLFormElement | null,
      'second classify form',
    );
    (form2.querySelector('select') as HTMLSelectElement).value = 'Hostile';
    form2.dispatchEvent(new Event('submit', { cancelable: true }));
    await until(
      () => (rowEls()[0]?.classList.contains('red') ? true : null),
      'beta helper to turn red',
    );
    expect(rowKeys()).toEqual(['beta helper', 'gamma tool']);
    expect(rowEls()[0].classList.contains('red')).toBe(true);
    expect(rowEls()[1].classList.contains('yellow')).toBe(true);

    // drill-down still honest after the mutations
    rowEls()[1].click();
    await until(
      () =>
        root.querySelector('.detail-panel h3')?.textContent === 'gamma tool'
          ? root.querySelector('.detail-panel')
          : null,
      'gamma tool detail',
    );
    const gamma = (await (
      await fetch(`${BASE}/services/gamma%20tool/hosts`)
    ).json()) as ServiceHostsDoc;
    const gammaShown = [...root.querySelectorAll('.detail-running li')].map(
      (li) => li.textContent,
    );
    expect(gammaShown).toEqual(gamma.running);
    expect(gamma.running).toEqual(['hostB']);

    // the whole flow, server startup included, stays under a minute
    expect((Date.now() - startedAt) / 1000).toBeLessThan(60);
  }, 60000);
});

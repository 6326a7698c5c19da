import { execFileSync } from 'node:child_process'
import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs'
import { tmpdir } from 'node:os'
import { join } from 'node:path'

import { describe, expect, it } from 'vitest'

import { assignLabel, exportJson, loadPairs, navigate } from '../src/session.js'
import { FakeStore } from './helpers.js'

const FIXTURES = join(__dirname, 'fixtures')


function pythonCli(args: string[], allowFailure = false): { code: number; out: string } {
  try {
    const out = execFileSync('python3', ['-m', 'bioprecedence.cli', ...args], {
      encoding: 'utf-8',
      stdio: ['ignore', 'pipe', 'pipe'],
    })
    return { code: 0, out }
  } catch (err) {
    const failure = err as { status?: number; stdout?: string; stderr?: string }
    if (!allowFailure) {
      throw new Error(`python cli failed: ${failure.stderr ?? ''}`)
    }
    return { code: failure.status ?? 1, out: failure.stdout ?? '' }
  }
}

function pythonAvailable(): boolean {
  try {
    execFileSync('python3', ['-c', 'import bioprecedence'], { stdio: 'ignore' })
    return true
  } catch {
    return false
  }
}

describe.skipIf(!pythonAvailable())('round trip with the analysis pipeline', () => {
  it('labels candidates with the number keys and exports a file the CLI accepts', () => {
    const store = new FakeStore()
    const candidates = readFileSync(join(FIXTURES, 'candidates.json'), 'utf-8')
    let session = loadPairs(candidates, store)
    expect(session.items.length).toBeGreaterThan(0)
    expect(session.items.every((item) => item.label === 'unlabeled')).toBe(true)

    // annotate every pair with the keyboard, like a human pass
    const keys = ['1', '2', '3', '7']
    for (let i = 0; i < session.items.length; i++) {
      session = assignLabel(session, keys[i % keys.length], store)
      session = navigate(session, 'ArrowRight', store)
    }
    expect(session.items.every((item) => item.label !== 'unlabeled')).toBe(true)

    const work = mkdtempSync(join(tmpdir(), 'annotator-roundtrip-'))
    const exported = join(work, 'export.json')
    writeFileSync(exported, exportJson(session))

    // agreement of the export with itself: accepted, kappa = 1
    const kappa = pythonCli(['kappa', exported, exported])
    expect(kappa.code).toBe(0)
    expect(kappa.out.trim()).toBe('1.0000')

    // the full loader (mention resolution included) accepts it too
    const predOut = join(work, 'preds')
    const trained = join(work, 'model')
    const train = pythonCli([
      'train',
      '--corpus', join(FIXTURES, 'corpus.json'),
      '--annotations', exported,
      '--model', 'intra',
      '--out', trained,
    ])
    expect(train.code).toBe(0)
    const predict = pythonCli([
      'predict',
      '--model', join(trained, 'model.json'),
      '--corpus', join(FIXTURES, 'corpus.json'),
      '--pairs', exported,
      '--out', predOut,
    ])
    expect(predict.code).toBe(0)
    const predictions = JSON.parse(
      readFileSync(join(predOut, 'predictions.json'), 'utf-8'),
    )
    expect(predictions).toHaveLength(session.items.length)
  })
})

import { CorpusView, parseCorpusBundle } from './corpus.js'
import { NAVIGATION_KEYS } from './keyboard.js'
import { SchemaError } from './schema.js'
import {
  AnnotationSession,
  assignLabel,
  exportJson,
  loadPairs,
  markClean,
  navigate,
} from './session.js'
import { clearCache, saveCache } from './storage.js'
import { render } from './view.js'

let session: AnnotationSession = loadPairs(null, window.localStorage)
let corpus: CorpusView | null = null

function linkTemplate(): string {
  const input = document.getElementById('link-template') as HTMLInputElement
  return input.value || '#'
}

function banner(message: string, isError: boolean): void {
  const node = document.getElementById('banner')!
  node.textContent = message
  node.className = isError ? 'banner error' : 'banner'
}

function redraw(): void {
  render(document, session, corpus, linkTemplate())
}

function onKeyDown(event: KeyboardEvent): void {
  if (event.target instanceof HTMLInputElement) return
  if (NAVIGATION_KEYS.has(event.key)) {
    session = navigate(session, event.key, window.localStorage)
    event.preventDefault()
    redraw()
    return
  }
  const updated = assignLabel(session, event.key, window.localStorage)
  if (updated !== session) {
    session = updated
    event.preventDefault()
    redraw()
  }
}

async function onAnnotationFile(files: FileList | null): Promise<void> {
  if (!files || files.length === 0) return
  try {
    const text = await files[0].text()
    session = loadPairs(text, window.localStorage)
    saveCache(window.localStorage, session.cacheKey, session.cursor, session.items)
    banner(`loaded ${session.items.length} pairs`, false)
  } catch (err) {
    if (err instanceof SchemaError) {
      banner(`file rejected: ${err.message}`, true)
      return
    }
    throw err
  }
  redraw()
}

async function onCorpusFile(files: FileList | null): Promise<void> {
  if (!files || files.length === 0) return
  try {
    corpus = parseCorpusBundle(await files[0].text())
    banner('corpus text loaded', false)
  } catch (err) {
    banner(`corpus rejected: ${(err as Error).message}`, true)
  }
  redraw()
}

function onExport(): void {
  const payload = exportJson(session)
  const blob = new Blob([payload], { type: 'application/json' })
  const url = URL.createObjectURL(blob)
  const anchor = document.createElement('a')
  anchor.href = url
  anchor.download = 'annotations.json'
  anchor.click()
  URL.revokeObjectURL(url)
  session = markClean(session)
  saveCache(window.localStorage, session.cacheKey, session.cursor, session.items)
  redraw()
}

function onClearCache(): void {
  clearCache(window.localStorage, session.cacheKey)
  banner('local cache cleared for this pair set', false)
}

export function boot(): void {
  document.addEventListener('keydown', onKeyDown)
  const annotationInput = document.getElementById('annotation-file') as HTMLInputElement
  annotationInput.addEventListener('change', () => {
    void onAnnotationFile(annotationInput.files)
  })
  const corpusInput = document.getElementById('corpus-file') as HTMLInputElement
  corpusInput.addEventListener('change', () => {
    void onCorpusFile(corpusInput.files)
  })
  document.getElementById('export')!.addEventListener('click', onExport)
  document.getElementById('clear-cache')!.addEventListener('click', onClearCache)
  document.getElementById('labels')!.addEventListener('click', (event) => {
    const target = event.target as HTMLElement
    if (target.dataset.key) {
      session = assignLabel(session, target.dataset.key, window.localStorage)
      redraw()
    }
  })
  document.getElementById('link-template')!.addEventListener('input', redraw)
  session = loadPairs(null, window.localStorage)
  if (session.items.length > 0) {
    banner(`restored ${session.items.length} pairs from the local cache`, false)
  }
  redraw()
}

declare global {
  interface ImportMeta {
    env?: Record<string, unknown>
  }
}

// The test runner imports this module and drives boot() itself.
if (!import.meta.env?.VITEST) {
  boot()
}

// @vitest-environment jsdom
import { readFileSync } from 'node:fs'
import { join } from 'node:path'

import { beforeEach, describe, expect, it } from 'vitest'

import { parseCorpusBundle } from '../src/corpus.js'
import { serializeAnnotations } from '../src/schema.js'
import { assignLabel, createSession, loadPairs, navigate } from '../src/session.js'
import { paperLink, render } from '../src/view.js'
import { FakeStore, makeItems } from './helpers.js'

const FIXTURES = join(__dirname, 'fixtures')

function mountDom(): void {
  document.body.innerHTML = `
    <div id="banner"></div>
    <span id="position"></span>
    <a id="paper-link"></a>
    <span id="coref-badge"></span>
    <span id="pair-id"></span>
    <div id="e1"></div>
    <div id="e2"></div>
    <div id="labels"></div>
    <span id="label-status"></span>
    <button id="export"></button>
  `
}

describe('view rendering', () => {
  beforeEach(mountDom)

  it('disables export for an empty session', () => {
    render(document, createSession([]), null, '#')
    const button = document.getElementById('export') as HTMLButtonElement
    expect(button.disabled).toBe(true)
    expect(document.getElementById('position')!.textContent).toBe('no pairs loaded')
  })

  it('shows an assigned label as selected', () => {
    const store = new FakeStore()
    let session = loadPairs(serializeAnnotations(makeItems(2)), store)
    session = assignLabel(session, '4', store)
    render(document, session, null, '#')
    const selected = document.querySelector('#labels button.selected')!
    expect(selected.textContent).toBe('4 E1 specifies E2')
    expect(document.getElementById('label-status')!.textContent)
      .toBe('E1 specifies E2')
  })

  it('renders a label carried by the loaded file as selected', () => {
    const items = makeItems(1)
    items[0] = { ...items[0], label: 'E1 specifies E2' }
    const session = loadPairs(serializeAnnotations(items), new FakeStore())
    render(document, session, null, '#')
    const selected = document.querySelector('#labels button.selected')!
    expect(selected.textContent).toBe('4 E1 specifies E2')
  })

  it('renders the position counter and paper link template', () => {
    let session = createSession(makeItems(10))
    session = navigate(session, 'ArrowRight')
    render(document, session, null, 'https://papers.test/{doc_id}')
    expect(document.getElementById('position')!.textContent).toBe('2 / 10')
    const link = document.getElementById('paper-link') as HTMLAnchorElement
    expect(link.getAttribute('href')).toBe('https://papers.test/doc1')
  })

  it('highlights event spans from the corpus bundle', () => {
    const corpus = parseCorpusBundle(
      readFileSync(join(FIXTURES, 'corpus.json'), 'utf-8'),
    )
    const candidates = readFileSync(join(FIXTURES, 'candidates.json'), 'utf-8')
    const session = loadPairs(candidates, new FakeStore())
    render(document, session, corpus, '#')
    const marks = document.querySelectorAll('#e1 mark.event')
    expect(marks.length).toBeGreaterThan(0)
    const e1Text = document.getElementById('e1')!.textContent ?? ''
    expect(e1Text.trim().length).toBeGreaterThan(0)
  })

  it('substitutes doc ids into the link template', () => {
    expect(paperLink('https://x/{doc_id}/y', 'PMC123')).toBe('https://x/PMC123/y')
    expect(paperLink('#', 'PMC123')).toBe('#')
  })
})

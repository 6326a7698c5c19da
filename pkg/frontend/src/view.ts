import { CorpusView, MentionView } from './corpus.js'
import { RELATION_LABELS, UNLABELED } from './schema.js'
import { AnnotationSession, currentItem } from './session.js'

/** Substitution template for the link to the source paper. */
export function paperLink(template: string, docId: string): string {
  return template.replace('{doc_id}', encodeURIComponent(docId))
}

function renderSentence(doc: Element, tokens: { text: string }[],
                        marks: Array<{ span: [number, number]; cls: string }>): void {
  tokens.forEach((token, index) => {
    const covering = marks.find(({ span }) => span[0] <= index && index < span[1])
    const node = document.createElement(covering ? 'mark' : 'span')
    if (covering) node.className = covering.cls
    node.textContent = token.text
    doc.appendChild(node)
    doc.appendChild(document.createTextNode(' '))
  })
}

function renderMention(container: Element, mention: MentionView | undefined,
                       corpus: CorpusView | null, fallback: string,
                       cls: string): void {
  container.textContent = ''
  if (!mention || !corpus) {
    const span = document.createElement('span')
    span.className = 'mention-id'
    span.textContent = fallback
    container.appendChild(span)
    return
  }
  const sentences = corpus.sentences.get(mention.doc_id) ?? []
  const wanted = new Map<number, Array<{ span: [number, number]; cls: string }>>()
  const add = (sentence: number, span: [number, number], markCls: string) => {
    const list = wanted.get(sentence) ?? []
    list.push({ span, cls: markCls })
    wanted.set(sentence, list)
  }
  add(mention.sentence, mention.span, cls)
  if (mention.antecedent) {
    add(mention.antecedent.sentence, mention.antecedent.span, 'antecedent')
  }
  const order = [...wanted.keys()].sort((a, b) => a - b)
  for (const index of order) {
    const sentence = sentences[index]
    if (!sentence) continue
    const p = document.createElement('p')
    p.className = 'sentence'
    renderSentence(p, sentence.tokens, wanted.get(index) ?? [])
    container.appendChild(p)
  }
}

/** Redraw the whole annotation view for the pair under the cursor. */
export function render(root: Document, session: AnnotationSession,
                       corpus: CorpusView | null, linkTemplate: string): void {
  const position = root.getElementById('position')!
  const exportButton = root.getElementById('export') as HTMLButtonElement
  const item = currentItem(session)
  exportButton.disabled = session.items.length === 0
  if (!item) {
    position.textContent = 'no pairs loaded'
    root.getElementById('pair-id')!.textContent = ''
    root.getElementById('e1')!.textContent = ''
    root.getElementById('e2')!.textContent = ''
    return
  }
  position.textContent = `${session.cursor + 1} / ${session.items.length}` +
    (session.dirty ? ' *' : '')
  root.getElementById('pair-id')!.textContent = item.pair_id
  const paper = root.getElementById('paper-link') as HTMLAnchorElement
  paper.textContent = item.doc_id
  paper.href = paperLink(linkTemplate, item.doc_id)
  const corefBadge = root.getElementById('coref-badge')!
  corefBadge.textContent = item.coref ? 'coreference' : ''

  renderMention(root.getElementById('e1')!, corpusMention(corpus, item.e1_id),
                corpus, item.e1_id, 'event e1')
  renderMention(root.getElementById('e2')!, corpusMention(corpus, item.e2_id),
                corpus, item.e2_id, 'event e2')

  const buttons = root.getElementById('labels')!
  buttons.textContent = ''
  RELATION_LABELS.forEach((label, index) => {
    const button = root.createElement('button')
    button.className = 'label' + (item.label === label ? ' selected' : '')
    button.dataset.key = String(index + 1)
    button.textContent = `${index + 1} ${label}`
    buttons.appendChild(button)
  })
  const status = root.getElementById('label-status')!
  status.textContent = item.label === UNLABELED ? 'unlabeled' : item.label
  status.className = item.label === UNLABELED ? 'unlabeled' : 'labeled'
}

function corpusMention(corpus: CorpusView | null, id: string): MentionView | undefined {
  return corpus?.mentions.get(id)
}

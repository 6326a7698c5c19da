/**
 * Optional display data: the corpus bundle produced by the pipeline's
 * ingest step. When loaded, the tool renders the actual sentences with
 * event spans highlighted; without it, pairs are shown by their ids.
 */

export interface TokenView {
  text: string
}

export interface SentenceView {
  tokens: TokenView[]
}

export interface MentionView {
  id: string
  doc_id: string
  sentence: number
  trigger: [number, number]
  span: [number, number]
  antecedent: { sentence: number; span: [number, number] } | null
}

export interface CorpusView {
  sentences: Map<string, SentenceView[]>   // doc_id -> sentences
  mentions: Map<string, MentionView>
}

export class CorpusFormatError extends Error {}

export function parseCorpusBundle(text: string): CorpusView {
  let data: unknown
  try {
    data = JSON.parse(text)
  } catch (err) {
    throw new CorpusFormatError(`not valid JSON: ${(err as Error).message}`)
  }
  const bundle = data as {
    format?: string
    documents?: Array<{ id: string; sentences: Array<{ tokens: TokenView[] }> }>
    mentions?: Array<MentionView & Record<string, unknown>>
  }
  if (bundle.format !== 'bioprecedence-corpus/1') {
    throw new CorpusFormatError(`unsupported corpus format: ${bundle.format}`)
  }
  const sentences = new Map<string, SentenceView[]>()
  for (const doc of bundle.documents ?? []) {
    sentences.set(doc.id, doc.sentences.map((s) => ({ tokens: s.tokens })))
  }
  const mentions = new Map<string, MentionView>()
  for (const mention of bundle.mentions ?? []) {
    mentions.set(mention.id, {
      id: mention.id,
      doc_id: mention.doc_id,
      sentence: mention.sentence,
      trigger: mention.trigger,
      span: mention.span,
      antecedent: mention.antecedent ?? null,
    })
  }
  return { sentences, mentions }
}

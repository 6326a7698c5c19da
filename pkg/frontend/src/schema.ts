/** Annotation JSON schema shared with the analysis pipeline. */

export const RELATION_LABELS = [
  'E1 precedes E2',
  'E2 precedes E1',
  'Equivalent',
  'E1 specifies E2',
  'E2 specifies E1',
  'Other',
  'None',
] as const

export type RelationLabel = (typeof RELATION_LABELS)[number]

export const UNLABELED = 'unlabeled'

export type PairLabel = RelationLabel | typeof UNLABELED

export interface AnnotationItem {
  pair_id: string
  doc_id: string
  e1_id: string
  e2_id: string
  label: PairLabel
  coref: boolean
  discarded: boolean
  note: string
}

export class SchemaError extends Error {}

const VALID_LABELS = new Set<string>([...RELATION_LABELS, UNLABELED])

function requireString(item: Record<string, unknown>, key: string, index: number): string {
  const value = item[key]
  if (typeof value !== 'string' || value === '') {
    throw new SchemaError(`item ${index}: field "${key}" must be a nonempty string`)
  }
  return value
}

/**
 * Parse and validate an annotation file. Throws on the first violation so
 * a bad file never produces a partially loaded session.
 */
export function parseAnnotationFile(text: string): AnnotationItem[] {
  let data: unknown
  try {
    data = JSON.parse(text)
  } catch (err) {
    throw new SchemaError(`not valid JSON: ${(err as Error).message}`)
  }
  if (!Array.isArray(data)) {
    throw new SchemaError('annotation file must be a JSON array')
  }
  const seen = new Set<string>()
  return data.map((raw, index) => {
    if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
      throw new SchemaError(`item ${index}: must be an object`)
    }
    const item = raw as Record<string, unknown>
    const pairId = requireString(item, 'pair_id', index)
    if (seen.has(pairId)) {
      throw new SchemaError(`item ${index}: duplicate pair_id "${pairId}"`)
    }
    seen.add(pairId)
    const label = requireString(item, 'label', index)
    if (!VALID_LABELS.has(label)) {
      throw new SchemaError(`item ${index}: unknown label "${label}"`)
    }
    for (const key of ['coref', 'discarded']) {
      if (key in item && typeof item[key] !== 'boolean') {
        throw new SchemaError(`item ${index}: field "${key}" must be a boolean`)
      }
    }
    if ('note' in item && typeof item.note !== 'string') {
      throw new SchemaError(`item ${index}: field "note" must be a string`)
    }
    return {
      pair_id: pairId,
      doc_id: requireString(item, 'doc_id', index),
      e1_id: requireString(item, 'e1_id', index),
      e2_id: requireString(item, 'e2_id', index),
      label: label as PairLabel,
      coref: (item.coref as boolean) ?? false,
      discarded: (item.discarded as boolean) ?? false,
      note: (item.note as string) ?? '',
    }
  })
}

/** Serialize items back to the shared schema, field order fixed. */
export function serializeAnnotations(items: AnnotationItem[]): string {
  const plain = items.map((item) => ({
    pair_id: item.pair_id,
    doc_id: item.doc_id,
    e1_id: item.e1_id,
    e2_id: item.e2_id,
    label: item.label,
    coref: item.coref,
    discarded: item.discarded,
    note: item.note,
  }))
  return JSON.stringify(plain, null, 2)
}

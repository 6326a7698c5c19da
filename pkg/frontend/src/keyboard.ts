import { RELATION_LABELS, RelationLabel } from './schema.js'

/**
 * Number keys 1-7 assign the seven relation labels in their canonical
 * order; arrow keys move between annotation instances.
 */
export const KEY_TO_LABEL: ReadonlyMap<string, RelationLabel> = new Map(
  RELATION_LABELS.map((label, index) => [String(index + 1), label]),
)

export const NAVIGATION_KEYS = new Set(['ArrowLeft', 'ArrowRight'])

export function labelForKey(key: string): RelationLabel | null {
  return KEY_TO_LABEL.get(key) ?? null
}

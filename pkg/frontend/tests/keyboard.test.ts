import { describe, expect, it } from 'vitest'

import { KEY_TO_LABEL, labelForKey } from '../src/keyboard.js'
import { RELATION_LABELS } from '../src/schema.js'

describe('keyboard mapping', () => {
  it('is total over the keys 1-7 and stable in canonical order', () => {
    expect(KEY_TO_LABEL.size).toBe(7)
    for (let i = 1; i <= 7; i++) {
      expect(KEY_TO_LABEL.get(String(i))).toBe(RELATION_LABELS[i - 1])
    }
  })

  it('maps key 1 to the forward precedence label', () => {
    expect(labelForKey('1')).toBe('E1 precedes E2')
  })

  it('maps key 7 to None', () => {
    expect(labelForKey('7')).toBe('None')
  })

  it('ignores every other key', () => {
    for (const key of ['0', '8', '9', 'a', 'Enter', ' ', 'Escape']) {
      expect(labelForKey(key)).toBeNull()
    }
  })
})

import { describe, expect, it } from 'vitest'

import { serializeAnnotations } from '../src/schema.js'
import { assignLabel, exportJson, loadPairs, navigate } from '../src/session.js'
import { clearCache, corpusDigest, latestCache, loadCache, saveCache } from '../src/storage.js'
import { FakeStore, makeItems } from './helpers.js'

describe('cache keys', () => {
  it('ignore label state and item order', () => {
    const items = makeItems(3)
    const relabeled = items.map((item) => ({ ...item, label: 'Other' as const }))
    const shuffled = [...items].reverse()
    expect(corpusDigest(relabeled)).toBe(corpusDigest(items))
    expect(corpusDigest(shuffled)).toBe(corpusDigest(items))
    expect(corpusDigest(makeItems(4))).not.toBe(corpusDigest(items))
  })
})

describe('persistence', () => {
  it('survives a simulated browser restart with labels and cursor', () => {
    const store = new FakeStore()
    const text = serializeAnnotations(makeItems(5))
    let session = loadPairs(text, store)
    session = assignLabel(session, '1', store)
    session = navigate(session, 'ArrowRight', store)
    session = navigate(session, 'ArrowRight', store)
    session = assignLabel(session, '7', store)

    // a fresh page load with no file: restore from the cache alone
    const restored = loadPairs(null, store)
    expect(restored.cursor).toBe(2)
    expect(restored.items[0].label).toBe('E1 precedes E2')
    expect(restored.items[2].label).toBe('None')
    expect(exportJson(restored)).toBe(exportJson(session))
  })

  it('cache and export agree for a clean session', () => {
    const store = new FakeStore()
    let session = loadPairs(serializeAnnotations(makeItems(3)), store)
    session = assignLabel(session, '5', store)
    const cached = loadCache(store, session.cacheKey)!
    expect(serializeAnnotations(cached.items)).toBe(exportJson(session))
  })

  it('tolerates corrupt cache payloads', () => {
    const store = new FakeStore()
    const items = makeItems(2)
    const key = corpusDigest(items)
    store.setItem(key, '{broken')
    expect(loadCache(store, key)).toBeNull()
    const session = loadPairs(serializeAnnotations(items), store)
    expect(session.items).toEqual(items)
  })

  it('clearCache removes the slot and the restart pointer', () => {
    const store = new FakeStore()
    const items = makeItems(2)
    const key = corpusDigest(items)
    saveCache(store, key, 0, items)
    expect(latestCache(store)).not.toBeNull()
    clearCache(store, key)
    expect(latestCache(store)).toBeNull()
  })
})

import { AnnotationItem } from './schema.js'

/** Minimal key-value surface so tests can swap in a fake localStorage. */
export interface CacheStore {
  getItem(key: string): string | null
  setItem(key: string, value: string): void
  removeItem(key: string): void
}

const PREFIX = 'bioprec-annotations:'
const LAST_KEY = 'bioprec-annotations-last'

export interface CachePayload {
  savedAt: number
  cursor: number
  items: AnnotationItem[]
}

/**
 * Cache key derived from the identity of the loaded pair set (FNV-1a over
 * the sorted pair ids), so re-uploading the same candidate file lands on
 * the same slot regardless of labels.
 */
export function corpusDigest(items: AnnotationItem[]): string {
  const ids = items.map((item) => item.pair_id).sort()
  let hash = 0x811c9dc5
  for (const id of ids) {
    for (let i = 0; i < id.length; i++) {
      hash ^= id.charCodeAt(i)
      hash = Math.imul(hash, 0x01000193) >>> 0
    }
    hash ^= 0x1f
    hash = Math.imul(hash, 0x01000193) >>> 0
  }
  return PREFIX + hash.toString(16).padStart(8, '0') + ':' + ids.length
}

export function saveCache(store: CacheStore, key: string, cursor: number,
                          items: AnnotationItem[], now?: number): void {
  const payload: CachePayload = {
    savedAt: now ?? Date.now(),
    cursor,
    items,
  }
  store.setItem(key, JSON.stringify(payload))
  store.setItem(LAST_KEY, key)
}

export function loadCache(store: CacheStore, key: string): CachePayload | null {
  const raw = store.getItem(key)
  if (raw === null) return null
  try {
    const payload = JSON.parse(raw) as CachePayload
    if (!Array.isArray(payload.items) || typeof payload.cursor !== 'number') {
      return null
    }
    return payload
  } catch {
    return null
  }
}

/** The cache slot touched most recently, for restoring after a restart. */
export function latestCache(store: CacheStore): CachePayload | null {
  const key = store.getItem(LAST_KEY)
  if (key === null) return null
  return loadCache(store, key)
}

export function clearCache(store: CacheStore, key: string): void {
  store.removeItem(key)
  if (store.getItem(LAST_KEY) === key) {
    store.removeItem(LAST_KEY)
  }
}

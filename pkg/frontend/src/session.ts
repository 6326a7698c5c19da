import { labelForKey } from './keyboard.js'
import { AnnotationItem, parseAnnotationFile, serializeAnnotations } from './schema.js'
import { CacheStore, corpusDigest, latestCache, loadCache, saveCache } from './storage.js'

export interface AnnotationSession {
  items: AnnotationItem[]
  cursor: number
  dirty: boolean
  cacheKey: string
}

export function createSession(items: AnnotationItem[], cacheKey?: string,
                              cursor = 0): AnnotationSession {
  return {
    items,
    cursor: items.length ? Math.min(Math.max(cursor, 0), items.length - 1) : 0,
    dirty: false,
    cacheKey: cacheKey ?? corpusDigest(items),
  }
}

/**
 * Build a session from an uploaded file, a cache slot, or both.
 *
 * A cache entry for the same pair set is the result of labeling work done
 * after that file was produced, so when both exist the cached labels,
 * notes, and cursor win over the file's contents.
 */
export function loadPairs(fileText: string | null, store: CacheStore): AnnotationSession {
  if (fileText === null) {
    const cached = latestCache(store)
    if (cached === null) {
      return createSession([])
    }
    return createSession(cached.items, undefined, cached.cursor)
  }
  const items = parseAnnotationFile(fileText)
  const cacheKey = corpusDigest(items)
  const cached = loadCache(store, cacheKey)
  if (cached !== null && cached.savedAt > 0) {
    const byId = new Map(cached.items.map((item) => [item.pair_id, item]))
    const merged = items.map((item) => byId.get(item.pair_id) ?? item)
    return createSession(merged, cacheKey, cached.cursor)
  }
  return createSession(items, cacheKey)
}

export function currentItem(session: AnnotationSession): AnnotationItem | null {
  return session.items.length ? session.items[session.cursor] : null
}

/**
 * Handle one key press: digits 1-7 assign a label to the pair in view and
 * auto-persist the session; every other key is ignored here (arrows are
 * handled by navigate).
 */
export function assignLabel(session: AnnotationSession, key: string,
                            store: CacheStore): AnnotationSession {
  const label = labelForKey(key)
  if (label === null || session.items.length === 0) {
    return session
  }
  const items = session.items.map((item, index) =>
    index === session.cursor ? { ...item, label } : item,
  )
  const next: AnnotationSession = { ...session, items, dirty: true }
  saveCache(store, next.cacheKey, next.cursor, next.items)
  return next
}

/** Arrow navigation, clamped at both ends. */
export function navigate(session: AnnotationSession, key: string,
                         store?: CacheStore): AnnotationSession {
  if (session.items.length === 0) return session
  let cursor = session.cursor
  if (key === 'ArrowRight') cursor = Math.min(cursor + 1, session.items.length - 1)
  else if (key === 'ArrowLeft') cursor = Math.max(cursor - 1, 0)
  else return session
  if (cursor === session.cursor) return session
  const next = { ...session, cursor }
  if (store !== undefined) {
    saveCache(store, next.cacheKey, next.cursor, next.items)
  }
  return next
}

/** Export in the shared schema; the pipeline loads this file unchanged. */
export function exportJson(session: AnnotationSession): string {
  return serializeAnnotations(session.items)
}

/** A persisted (clean) session's cache and its export must agree. */
export function markClean(session: AnnotationSession): AnnotationSession {
  return { ...session, dirty: false }
}

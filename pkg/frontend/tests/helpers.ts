import { AnnotationItem, UNLABELED } from '../src/schema.js'
import { CacheStore } from '../src/storage.js'

export class FakeStore implements CacheStore {
  private data = new Map<string, string>()

  getItem(key: string): string | null {
    return this.data.get(key) ?? null
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value)
  }

  removeItem(key: string): void {
    this.data.delete(key)
  }

  keys(): string[] {
    return [...this.data.keys()]
  }
}

export function makeItems(n: number): AnnotationItem[] {
  return Array.from({ length: n }, (_, i) => ({
    pair_id: `doc1:e${i}:e${i + 1}`,
    doc_id: 'doc1',
    e1_id: `e${i}`,
    e2_id: `e${i + 1}`,
    label: UNLABELED,
    coref: false,
    discarded: false,
    note: '',
  }))
}

/**
 * Optimistic mutation helper: apply the UI change immediately, run the
 * remote call in the background, revert and report on failure.
 */

export interface OptimisticOptions<T> {
  /** Apply the change now; returns a snapshot used to revert. */
  apply: () => T;
  /** The real server call. */
  remote: () => Promise<void>;
  /** Undo using the snapshot when the server refuses. */
  revert: (snapshot: T) => void;
  onError?: (error: unknown) => void;
}

export async function optimistic<T>(options: OptimisticOptions<T>): Promise<boolean> {
  const snapshot = options.apply();
  try {
    await options.remote();
    return true;
  } catch (error) {
    options.revert(snapshot);
    options.onError?.(error);
    return false;
  }
}

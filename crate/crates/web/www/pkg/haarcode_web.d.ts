/* tslint:disable */
/* eslint-disable */

/**
 * Mean-shift and zeroth-order band means at one error rate.
 */
export function band_model_json(p: number, n: number, k: number, on_q: boolean): string;

/**
 * Sample weight-`w` codes, histogram the rescaled eigenvalues of the
 * microcanonical state on Q and overlay the Marchenko-Pastur law.
 */
export function micro_histogram_json(n: number, w: number, samples: number, seed: bigint): string;

/**
 * Marchenko-Pastur edges for the page's axis labels.
 */
export function mp_edges_json(c: number): string;

/**
 * Threshold versus alpha, the postselected phase boundary and the
 * leading-order coherent information, all at rate `k/N`.
 */
export function thresholds_json(n: number, k: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly band_model_json: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly micro_histogram_json: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly mp_edges_json: (a: number) => [number, number, number, number];
    readonly thresholds_json: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;

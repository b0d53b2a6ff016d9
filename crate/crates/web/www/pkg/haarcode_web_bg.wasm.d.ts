/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const band_model_json: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const micro_histogram_json: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
export const mp_edges_json: (a: number) => [number, number, number, number];
export const thresholds_json: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;

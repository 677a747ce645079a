/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_scanview_free: (a: number, b: number) => void;
export const __wbg_suppressionview_free: (a: number, b: number) => void;
export const __wbg_tdcview_free: (a: number, b: number) => void;
export const autotune: () => [number, number, number, number];
export const scan: (a: number, b: number, c: number) => [number, number, number];
export const scanview_active_fwhm_ps: (a: number) => number;
export const scanview_duty_cycle: (a: number) => number;
export const scanview_offsets_ps: (a: number) => [number, number];
export const scanview_rates_hz: (a: number) => [number, number];
export const suppression: (a: number, b: number, c: number) => [number, number, number];
export const suppressionview_input: (a: number) => [number, number];
export const suppressionview_output: (a: number) => [number, number];
export const tdcRun: (a: number, b: number, c: number) => [number, number, number];
export const tdcview_counts: (a: number) => [number, number];
export const tdcview_jitter_fwhm_ps: (a: number) => number;
export const tdcview_p_a: (a: number) => number;
export const tdcview_p_dc: (a: number) => number;
export const suppressionview_sample_ps: (a: number) => number;
export const suppressionview_suppression_db: (a: number) => number;
export const tdcview_bin_width_ps: (a: number) => number;
export const tdcview_eta: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;

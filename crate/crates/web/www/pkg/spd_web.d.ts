/* tslint:disable */
/* eslint-disable */

/**
 * Count rate against laser delay, with the extracted active time.
 */
export class ScanView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly active_fwhm_ps: number;
    readonly duty_cycle: number;
    readonly offsets_ps: Float64Array;
    readonly rates_hz: Float64Array;
}

/**
 * Test signal, its self-differenced output and the suppression achieved.
 */
export class SuppressionView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly input: Float64Array;
    /**
     * Differential amplifier output.
     */
    readonly output: Float64Array;
    readonly sample_ps: number;
    readonly suppression_db: number;
}

/**
 * Folded TDC histogram over one laser period plus the headline metrics.
 */
export class TdcView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly bin_width_ps: number;
    readonly counts: Float64Array;
    /**
     * NaN when undefined.
     */
    readonly eta: number;
    readonly jitter_fwhm_ps: number;
    readonly p_a: number;
    readonly p_dc: number;
}

/**
 * `[trim_db, delay_fine_ps]`.
 */
export function autotune(): Float64Array;

export function scan(gate_rate_hz: number, gates_per_point: number, seed: number): ScanView;

export function suppression(trim_db: number, delay_fine_ps: number, event_mv: number): SuppressionView;

export function tdcRun(n_gates: number, mu: number, seed: number): TdcView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_scanview_free: (a: number, b: number) => void;
    readonly __wbg_suppressionview_free: (a: number, b: number) => void;
    readonly __wbg_tdcview_free: (a: number, b: number) => void;
    readonly autotune: () => [number, number, number, number];
    readonly scan: (a: number, b: number, c: number) => [number, number, number];
    readonly scanview_active_fwhm_ps: (a: number) => number;
    readonly scanview_duty_cycle: (a: number) => number;
    readonly scanview_offsets_ps: (a: number) => [number, number];
    readonly scanview_rates_hz: (a: number) => [number, number];
    readonly suppression: (a: number, b: number, c: number) => [number, number, number];
    readonly suppressionview_input: (a: number) => [number, number];
    readonly suppressionview_output: (a: number) => [number, number];
    readonly tdcRun: (a: number, b: number, c: number) => [number, number, number];
    readonly tdcview_counts: (a: number) => [number, number];
    readonly tdcview_jitter_fwhm_ps: (a: number) => number;
    readonly tdcview_p_a: (a: number) => number;
    readonly tdcview_p_dc: (a: number) => number;
    readonly suppressionview_sample_ps: (a: number) => number;
    readonly suppressionview_suppression_db: (a: number) => number;
    readonly tdcview_bin_width_ps: (a: number) => number;
    readonly tdcview_eta: (a: number) => number;
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

/* @ts-self-types="./spd_web.d.ts" */

/**
 * Count rate against laser delay, with the extracted active time.
 */
export class ScanView {
    static __wrap(ptr) {
        const obj = Object.create(ScanView.prototype);
        obj.__wbg_ptr = ptr;
        ScanViewFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        ScanViewFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_scanview_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get active_fwhm_ps() {
        const ret = wasm.scanview_active_fwhm_ps(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get duty_cycle() {
        const ret = wasm.scanview_duty_cycle(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    get offsets_ps() {
        const ret = wasm.scanview_offsets_ps(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {Float64Array}
     */
    get rates_hz() {
        const ret = wasm.scanview_rates_hz(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
}
if (Symbol.dispose) ScanView.prototype[Symbol.dispose] = ScanView.prototype.free;

/**
 * Test signal, its self-differenced output and the suppression achieved.
 */
export class SuppressionView {
    static __wrap(ptr) {
        const obj = Object.create(SuppressionView.prototype);
        obj.__wbg_ptr = ptr;
        SuppressionViewFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        SuppressionViewFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_suppressionview_free(ptr, 0);
    }
    /**
     * @returns {Float64Array}
     */
    get input() {
        const ret = wasm.suppressionview_input(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * Differential amplifier output.
     * @returns {Float64Array}
     */
    get output() {
        const ret = wasm.suppressionview_output(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get sample_ps() {
        const ret = wasm.suppressionview_sample_ps(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get suppression_db() {
        const ret = wasm.suppressionview_suppression_db(this.__wbg_ptr);
        return ret;
    }
}
if (Symbol.dispose) SuppressionView.prototype[Symbol.dispose] = SuppressionView.prototype.free;

/**
 * Folded TDC histogram over one laser period plus the headline metrics.
 */
export class TdcView {
    static __wrap(ptr) {
        const obj = Object.create(TdcView.prototype);
        obj.__wbg_ptr = ptr;
        TdcViewFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        TdcViewFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_tdcview_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get bin_width_ps() {
        const ret = wasm.tdcview_bin_width_ps(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    get counts() {
        const ret = wasm.tdcview_counts(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * NaN when undefined.
     * @returns {number}
     */
    get eta() {
        const ret = wasm.tdcview_eta(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get jitter_fwhm_ps() {
        const ret = wasm.tdcview_jitter_fwhm_ps(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get p_a() {
        const ret = wasm.tdcview_p_a(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get p_dc() {
        const ret = wasm.tdcview_p_dc(this.__wbg_ptr);
        return ret;
    }
}
if (Symbol.dispose) TdcView.prototype[Symbol.dispose] = TdcView.prototype.free;

/**
 * `[trim_db, delay_fine_ps]`.
 * @returns {Float64Array}
 */
export function autotune() {
    const ret = wasm.autotune();
    if (ret[3]) {
        throw takeFromExternrefTable0(ret[2]);
    }
    var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
    wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
    return v1;
}

/**
 * @param {number} gate_rate_hz
 * @param {number} gates_per_point
 * @param {number} seed
 * @returns {ScanView}
 */
export function scan(gate_rate_hz, gates_per_point, seed) {
    const ret = wasm.scan(gate_rate_hz, gates_per_point, seed);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return ScanView.__wrap(ret[0]);
}

/**
 * @param {number} trim_db
 * @param {number} delay_fine_ps
 * @param {number} event_mv
 * @returns {SuppressionView}
 */
export function suppression(trim_db, delay_fine_ps, event_mv) {
    const ret = wasm.suppression(trim_db, delay_fine_ps, event_mv);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return SuppressionView.__wrap(ret[0]);
}

/**
 * @param {number} n_gates
 * @param {number} mu
 * @param {number} seed
 * @returns {TdcView}
 */
export function tdcRun(n_gates, mu, seed) {
    const ret = wasm.tdcRun(n_gates, mu, seed);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return TdcView.__wrap(ret[0]);
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_92b29b0548f8b746: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
        __wbg___wbindgen_throw_344f42d3211c4765: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./spd_web_bg.js": import0,
    };
}

const ScanViewFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_scanview_free(ptr, 1));
const SuppressionViewFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_suppressionview_free(ptr, 1));
const TdcViewFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_tdcview_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = module.ok && expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('spd_web_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };

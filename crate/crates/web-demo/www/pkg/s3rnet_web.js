/* @ts-self-types="./s3rnet_web.d.ts" */

export class EnergyReport {
    static __wrap(ptr) {
        const obj = Object.create(EnergyReport.prototype);
        obj.__wbg_ptr = ptr;
        EnergyReportFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        EnergyReportFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_energyreport_free(ptr, 0);
    }
    /**
     * Channel index of each entry in `energies`.
     * @returns {Uint32Array}
     */
    channels() {
        const ret = wasm.energyreport_channels(this.__wbg_ptr);
        var v1 = getArrayU32FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 4, 4);
        return v1;
    }
    /**
     * Normalised energies, largest first.
     * @returns {Float64Array}
     */
    energies() {
        const ret = wasm.energyreport_energies(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get gini() {
        const ret = wasm.__wbg_get_energyreport_gini(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get params() {
        const ret = wasm.__wbg_get_energyreport_params(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    get top_quarter() {
        const ret = wasm.__wbg_get_energyreport_top_quarter(this.__wbg_ptr);
        return ret;
    }
    /**
     * @param {number} arg0
     */
    set gini(arg0) {
        wasm.__wbg_set_energyreport_gini(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set params(arg0) {
        wasm.__wbg_set_energyreport_params(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set top_quarter(arg0) {
        wasm.__wbg_set_energyreport_top_quarter(this.__wbg_ptr, arg0);
    }
}
if (Symbol.dispose) EnergyReport.prototype[Symbol.dispose] = EnergyReport.prototype.free;

export class NoiseReport {
    static __wrap(ptr) {
        const obj = Object.create(NoiseReport.prototype);
        obj.__wbg_ptr = ptr;
        NoiseReportFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        NoiseReportFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_noisereport_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get clean_psnr() {
        const ret = wasm.__wbg_get_noisereport_clean_psnr(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get clean_sam() {
        const ret = wasm.__wbg_get_noisereport_clean_sam(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get measured_snr_db() {
        const ret = wasm.__wbg_get_noisereport_measured_snr_db(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get noisy_ergas() {
        const ret = wasm.__wbg_get_noisereport_noisy_ergas(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get noisy_psnr() {
        const ret = wasm.__wbg_get_noisereport_noisy_psnr(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get noisy_rmse() {
        const ret = wasm.__wbg_get_noisereport_noisy_rmse(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get noisy_sam() {
        const ret = wasm.__wbg_get_noisereport_noisy_sam(this.__wbg_ptr);
        return ret;
    }
    /**
     * @param {number} arg0
     */
    set clean_psnr(arg0) {
        wasm.__wbg_set_noisereport_clean_psnr(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set clean_sam(arg0) {
        wasm.__wbg_set_noisereport_clean_sam(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set measured_snr_db(arg0) {
        wasm.__wbg_set_noisereport_measured_snr_db(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set noisy_ergas(arg0) {
        wasm.__wbg_set_noisereport_noisy_ergas(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set noisy_psnr(arg0) {
        wasm.__wbg_set_noisereport_noisy_psnr(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set noisy_rmse(arg0) {
        wasm.__wbg_set_noisereport_noisy_rmse(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set noisy_sam(arg0) {
        wasm.__wbg_set_noisereport_noisy_sam(this.__wbg_ptr, arg0);
    }
}
if (Symbol.dispose) NoiseReport.prototype[Symbol.dispose] = NoiseReport.prototype.free;

export class Preview {
    static __wrap(ptr) {
        const obj = Object.create(Preview.prototype);
        obj.__wbg_ptr = ptr;
        PreviewFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        PreviewFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_preview_free(ptr, 0);
    }
    /**
     * RGBA of the LR hyperspectral observation.
     * @returns {Uint8Array}
     */
    low() {
        const ret = wasm.preview_low(this.__wbg_ptr);
        var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
        return v1;
    }
    /**
     * @returns {number}
     */
    get low_side() {
        const ret = wasm.preview_low_side(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * RGBA of the HR multispectral observation.
     * @returns {Uint8Array}
     */
    multi() {
        const ret = wasm.preview_multi(this.__wbg_ptr);
        var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
        return v1;
    }
    /**
     * @returns {number}
     */
    get side() {
        const ret = wasm.preview_side(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * RGBA of the HR target `Y`.
     * @returns {Uint8Array}
     */
    target() {
        const ret = wasm.preview_target(this.__wbg_ptr);
        var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
        return v1;
    }
}
if (Symbol.dispose) Preview.prototype[Symbol.dispose] = Preview.prototype.free;

/**
 * Simulate a scene and show `Y`, `X_h` and `X_m` side by side.
 * @param {number} size
 * @param {number} bands
 * @param {number} msi_bands
 * @param {number} scale
 * @param {bigint} seed
 * @returns {Preview}
 */
export function degradation_preview(size, bands, msi_bands, scale, seed) {
    const ret = wasm.degradation_preview(size, bands, msi_bands, scale, seed);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return Preview.__wrap(ret[0]);
}

/**
 * Fused-channel energy of a freshly initialised small network.
 * @param {number} size
 * @param {number} bands
 * @param {number} msi_bands
 * @param {number} scale
 * @param {bigint} seed
 * @param {boolean} kaiming
 * @returns {EnergyReport}
 */
export function fused_energy(size, bands, msi_bands, scale, seed, kaiming) {
    const ret = wasm.fused_energy(size, bands, msi_bands, scale, seed, kaiming);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return EnergyReport.__wrap(ret[0]);
}

/**
 * @param {number} size
 * @param {number} bands
 * @param {number} msi_bands
 * @param {number} scale
 * @param {bigint} seed
 * @param {number} snr_db
 * @returns {NoiseReport}
 */
export function noise_metrics(size, bands, msi_bands, scale, seed, snr_db) {
    const ret = wasm.noise_metrics(size, bands, msi_bands, scale, seed, snr_db);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return NoiseReport.__wrap(ret[0]);
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_30c8987f7c2ed4e2: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
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
        "./s3rnet_web_bg.js": import0,
    };
}

const EnergyReportFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_energyreport_free(ptr, 1));
const NoiseReportFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_noisereport_free(ptr, 1));
const PreviewFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_preview_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

function getArrayU32FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getUint32ArrayMemory0().subarray(ptr / 4, ptr / 4 + len);
}

function getArrayU8FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getUint8ArrayMemory0().subarray(ptr / 1, ptr / 1 + len);
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

let cachedUint32ArrayMemory0 = null;
function getUint32ArrayMemory0() {
    if (cachedUint32ArrayMemory0 === null || cachedUint32ArrayMemory0.byteLength === 0) {
        cachedUint32ArrayMemory0 = new Uint32Array(wasm.memory.buffer);
    }
    return cachedUint32ArrayMemory0;
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
    cachedUint32ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (!module.ok) {
            throw new Error(`failed to fetch Wasm: ${module.status} ${module.statusText} fetching '${module.url}'`);
        }

        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = expectedResponseType(module.type);

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
        module_or_path = new URL('s3rnet_web_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };

// Minimal WAV codec: encode recorded takes for upload, decode server
// media in tests. PCM16 and float32, mono after mixdown.

export interface PcmAudio {
  samples: Float32Array;
  sampleRate: number;
}

export function encodeWavPcm16(samples: Float32Array, sampleRate: number): ArrayBuffer {
  const buffer = new ArrayBuffer(44 + samples.length * 2);
  const view = new DataView(buffer);
  const writeTag = (offset: number, tag: string) => {
    for (let i = 0; i < tag.length; i++) view.setUint8(offset + i, tag.charCodeAt(i));
  };
  writeTag(0, "RIFF");
  view.setUint32(4, 36 + samples.length * 2, true);
  writeTag(8, "WAVE");
  writeTag(12, "fmt ");
  view.setUint32(16, 16, true);
  view.setUint16(20, 1, true); // PCM
  view.setUint16(22, 1, true); // mono
  view.setUint32(24, sampleRate, true);
  view.setUint32(28, sampleRate * 2, true);
  view.setUint16(32, 2, true);
  view.setUint16(34, 16, true);
  writeTag(36, "data");
  view.setUint32(40, samples.length * 2, true);
  for (let i = 0; i < samples.length; i++) {
    const clamped = Math.max(-1, Math.min(1, samples[i]));
    const scaled = Math.round(clamped * 32768);
    view.setInt16(44 + i * 2, Math.max(-32768, Math.min(32767, scaled)), true);
  }
  return buffer;
}

export function decodeWav(buffer: ArrayBuffer): PcmAudio {
  const view = new DataView(buffer);
  const tag = (offset: number) =>
    String.fromCharCode(view.getUint8(offset), view.getUint8(offset + 1), view.getUint8(offset + 2), view.getUint8(offset + 3));
  if (tag(0) !== "RIFF" || tag(8) !== "WAVE") throw new Error("not a WAV stream");

  let format = 0;
  let channels = 1;
  let sampleRate = 0;
  let bits = 0;
  let dataOffset = -1;
  let dataLength = 0;
  let offset = 12;
  while (offset + 8 <= view.byteLength) {
    const id = tag(offset);
    const size = view.getUint32(offset + 4, true);
    if (id === "fmt ") {
      format = view.getUint16(offset + 8, true);
      channels = view.getUint16(offset + 10, true);
      sampleRate = view.getUint32(offset + 12, true);
      bits = view.getUint16(offset + 22, true);
    } else if (id === "data") {
      dataOffset = offset + 8;
      dataLength = size;
    }
    offset += 8 + size + (size & 1);
  }
  if (dataOffset < 0 || sampleRate <= 0) throw new Error("malformed WAV stream");

  let interleaved: Float32Array;
  if (format === 1 && bits === 16) {
    const count = Math.floor(dataLength / 2);
    interleaved = new Float32Array(count);
    for (let i = 0; i < count; i++) interleaved[i] = view.getInt16(dataOffset + i * 2, true) / 32768;
  } else if (format === 3 && bits === 32) {
    const count = Math.floor(dataLength / 4);
    interleaved = new Float32Array(count);
    for (let i = 0; i < count; i++) interleaved[i] = view.getFloat32(dataOffset + i * 4, true);
  } else {
    throw new Error(`unsupported WAV format ${format}/${bits}`);
  }

  if (channels <= 1) return { samples: interleaved, sampleRate };
  const frames = Math.floor(interleaved.length / channels);
  const mono = new Float32Array(frames);
  for (let f = 0; f < frames; f++) {
    let total = 0;
    for (let c = 0; c < channels; c++) total += interleaved[f * channels + c];
    mono[f] = total / channels;
  }
  return { samples: mono, sampleRate };
}

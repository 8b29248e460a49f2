// The global fetch in this environment is node's undici, but jsdom
// installs its own Blob/File/FormData, and the two stacks reject each
// other's types. Use undici's multipart types end to end.

import { Blob as NodeBlob, File as NodeFile } from "node:buffer";
import { FormData as UndiciFormData } from "undici";

globalThis.Blob = NodeBlob as unknown as typeof globalThis.Blob;
globalThis.File = NodeFile as unknown as typeof globalThis.File;
globalThis.FormData = UndiciFormData as unknown as typeof globalThis.FormData;

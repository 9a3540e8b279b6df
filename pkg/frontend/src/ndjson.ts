// Incremental newline-delimited JSON parsing for the event stream.

export class NdjsonParser<T> {
  private buffer = "";

  push(chunk: string): T[] {
    this.buffer += chunk;
    const out: T[] = [];
    let idx: number;
    while ((idx = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, idx).trim();
      this.buffer = this.buffer.slice(idx + 1);
      if (line.length > 0) {
        out.push(JSON.parse(line) as T);
      }
    }
    return out;
  }

  flush(): T[] {
    const line = this.buffer.trim();
    this.buffer = "";
    return line.length > 0 ? [JSON.parse(line) as T] : [];
  }
}

export function parseNdjson<T>(text: string): T[] {
  const parser = new NdjsonParser<T>();
  return [...parser.push(text), ...parser.flush()];
}

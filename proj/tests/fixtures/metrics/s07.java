public void writeLine(Writer w, String line) throws IOException {
    try {
        w.write(line);
        w.write('\n');
    } finally {
        w.flush();
    }
}

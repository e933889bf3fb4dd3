public static Properties load(File file) {
    Properties props = new Properties();
    if (file == null || !file.exists()) {
        return props;
    }
    try (InputStream in = new FileInputStream(file)) {
        props.load(in);
    } catch (IOException | IllegalArgumentException e) {
        if (LOG.isDebugEnabled()) {
            LOG.debug("cannot load " + file, e);
        }
    }
    return props;
}

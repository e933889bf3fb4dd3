public List<String> nonEmpty(List<String> in) {
    List<String> out = new ArrayList<>();
    for (;;) {
        if (out.size() >= MAX) break;
        in.stream().filter(s -> s != null && !s.isEmpty()).forEach(out::add);
        break;
    }
    return out;
}

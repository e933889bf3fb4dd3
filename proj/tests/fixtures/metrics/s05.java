public boolean isBlank(CharSequence cs) {
    if (cs == null || cs.length() == 0) {
        return true;
    }
    for (int i = 0; i < cs.length(); i++) {
        if (!Character.isWhitespace(cs.charAt(i))) {
            return false;
        }
    }
    if (!(cs == null)) {
        log("checked");
    }
    return true;
}
